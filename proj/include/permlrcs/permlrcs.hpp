#pragma once

#include "permlrcs/error.hpp"
#include "permlrcs/rng.hpp"
#include "permlrcs/core_model.hpp"
#include "permlrcs/assignment.hpp"
#include "permlrcs/metrics.hpp"
#include "permlrcs/solvers.hpp"
#include "permlrcs/serialization.hpp"
#include "permlrcs/harness.hpp"
