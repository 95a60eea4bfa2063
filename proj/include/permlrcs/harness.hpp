#pragma once

// Experiment orchestration behind the permlrcs CLI: config resolution,
// single solves, Monte-Carlo phase grids and runtime benchmarks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "permlrcs/core_model.hpp"
#include "permlrcs/metrics.hpp"
#include "permlrcs/serialization.hpp"
#include "permlrcs/solvers.hpp"

namespace permlrcs {

enum class Algorithm {
  kPermAltGDMin,
  kPermAltMinExact,
  kPermAltMinGD,
  kLrcsCollapsedAltGDMin,
  kLrcsCollapsedAltMin,
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::kPermAltGDMin, Algorithm::kPermAltMinExact, Algorithm::kPermAltMinGD,
    Algorithm::kLrcsCollapsedAltGDMin, Algorithm::kLrcsCollapsedAltMin};

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPermAltGDMin: return "perm-altgdmin";
    case Algorithm::kPermAltMinExact: return "perm-altmin-exact";
    case Algorithm::kPermAltMinGD: return "perm-altmin-gd";
    case Algorithm::kLrcsCollapsedAltGDMin: return "lrcs-cllps-altgdmin";
    case Algorithm::kLrcsCollapsedAltMin: return "lrcs-cllps-altmin";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(const std::string& name) {
  for (auto a : kAllAlgorithms)
    if (to_string(a) == name) return a;
  std::string known;
  for (auto a : kAllAlgorithms) known += (known.empty() ? "" : ", ") + to_string(a);
  throw Error("unknown algorithm '" + name + "' (expected one of: " + known + ")");
}

enum class Command { kGen, kSolve, kPhase, kBench };

struct ExperimentConfig {
  // Grid axes. gen/solve/bench use single values; phase takes the product.
  std::vector<Index> n{100}, q{200}, m{60}, r{2}, s{5};
  int trials = 10;
  std::vector<Algorithm> algorithms{Algorithm::kPermAltGDMin};
  SolverConfig solver;
  InnerSolverConfig altmin_gd_inner{InnerMode::kGradientDescent, 8, 1e-14};
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string instance;  // solve only
  int threads = 0;       // 0 = auto

  Dims single_dims() const {
    auto one = [](const std::vector<Index>& v, const char* name) {
      if (v.size() != 1) throw InvalidDims(std::string(name) + " must be a single value for this command");
      return v.front();
    };
    return {one(n, "n"), one(q, "q"), one(m, "m"), one(r, "r"), one(s, "s")};
  }
};

// Built-in defaults per command.
inline ExperimentConfig default_config(Command cmd) {
  ExperimentConfig c;
  switch (cmd) {
    case Command::kPhase:
      c.s = {2, 5, 10, 15, 20};
      c.r = {1, 2, 3, 4, 5, 6, 7, 8};
      break;
    case Command::kBench:
      c.algorithms = {Algorithm::kPermAltGDMin, Algorithm::kPermAltMinGD, Algorithm::kPermAltMinExact,
                      Algorithm::kLrcsCollapsedAltGDMin, Algorithm::kLrcsCollapsedAltMin};
      break;
    default:
      break;
  }
  return c;
}

namespace detail {

inline std::vector<Index> index_list(const nlohmann::json& j, const char* key) {
  std::vector<Index> v;
  if (j.is_array()) {
    for (const auto& e : j) v.push_back(e.get<Index>());
  } else {
    v.push_back(j.get<Index>());
  }
  if (v.empty()) throw FormatError(std::string("config: '") + key + "' is empty");
  return v;
}

}  // namespace detail

// Overlays a JSON config object onto `cfg`. Unknown keys are rejected.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "n") cfg.n = detail::index_list(val, "n");
      else if (key == "q") cfg.q = detail::index_list(val, "q");
      else if (key == "m") cfg.m = detail::index_list(val, "m");
      else if (key == "r") cfg.r = detail::index_list(val, "r");
      else if (key == "s") cfg.s = detail::index_list(val, "s");
      else if (key == "trials") cfg.trials = val.get<int>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "out") cfg.out = val.get<std::string>();
      else if (key == "instance") cfg.instance = val.get<std::string>();
      else if (key == "threads") cfg.threads = val.get<int>();
      else if (key == "max_iters") cfg.solver.max_iters = val.get<int>();
      else if (key == "stop_tol") cfg.solver.stop_tol = val.get<double>();
      else if (key == "algo" || key == "algorithms") {
        cfg.algorithms.clear();
        if (val.is_array()) {
          for (const auto& a : val) cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));
        } else {
          cfg.algorithms.push_back(parse_algorithm(val.get<std::string>()));
        }
      } else if (key == "solver") {
        for (const auto& [sk, sv] : val.items()) {
          if (sk == "eta") {
            cfg.solver.eta_mode = StepSizeMode::kFixed;
            cfg.solver.eta = sv.get<double>();
          } else if (sk == "stall_window") cfg.solver.stall_window = sv.get<int>();
          else if (sk == "inner_max") cfg.altmin_gd_inner.max_inner = sv.get<int>();
          else if (sk == "inner_tol") cfg.altmin_gd_inner.inner_tol = sv.get<double>();
          else throw FormatError("config: unknown solver key '" + sk + "'");
        }
      } else {
        throw FormatError("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
}

inline void apply_json_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  apply_json(cfg, j);
}

// Effective worker count: explicit value, else PERMLRCS_THREADS, else hardware.
inline unsigned resolve_threads(int requested) {
  long n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("PERMLRCS_THREADS")) n = std::strtol(env, nullptr, 10);
  }
  if (n <= 0) n = static_cast<long>(std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max(1L, n));
}

inline SolverConfig solver_config_for(Algorithm a, const ExperimentConfig& cfg) {
  SolverConfig sc = cfg.solver;
  switch (a) {
    case Algorithm::kPermAltMinGD:
      sc.inner = cfg.altmin_gd_inner;
      sc.inner.mode = InnerMode::kGradientDescent;
      break;
    case Algorithm::kPermAltMinExact:
    case Algorithm::kLrcsCollapsedAltMin:
      sc.inner.mode = InnerMode::kDirect;
      break;
    default:
      break;
  }
  return sc;
}

inline SolveResult run_algorithm(Algorithm a, const ProblemInstance& inst, const SolverConfig& sc,
                                 const GroundTruth* truth) {
  switch (a) {
    case Algorithm::kPermAltGDMin: return run_perm_altgdmin(inst, sc, truth);
    case Algorithm::kPermAltMinExact:
    case Algorithm::kPermAltMinGD: return run_perm_altmin(inst, sc, truth);
    case Algorithm::kLrcsCollapsedAltGDMin:
      return run_lrcs_collapsed_baseline(inst, sc, BaselineVariant::kAltGDMin, truth);
    case Algorithm::kLrcsCollapsedAltMin:
      return run_lrcs_collapsed_baseline(inst, sc, BaselineVariant::kAltMin, truth);
  }
  throw Error("unhandled algorithm");
}

// ---------------------------------------------------------------------------
// CSV helpers

namespace csv {

inline std::string num(double v, const char* fmt = "%.17g") {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline std::string seconds(double v) { return num(v, "%.6f"); }

inline std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  return os;
}

}  // namespace csv

inline constexpr const char* kTraceHeader = "iter,objective,sd,cum_time_s";

inline void write_trace_csv(std::ostream& os, const SolveResult& res) {
  os << kTraceHeader << '\n';
  for (const auto& t : res.trace)
    os << t.iter << ',' << csv::num(t.objective) << ',' << csv::num(t.sd) << ',' << csv::seconds(t.cum_time_s)
       << '\n';
}

inline nlohmann::json solver_config_json(const SolverConfig& sc) {
  nlohmann::json j{{"max_iters", sc.max_iters},
                   {"stop_tol", sc.stop_tol},
                   {"stall_window", sc.stall_window},
                   {"eta_mode", sc.eta_mode == StepSizeMode::kFixed ? "fixed" : "altgdmin-default"}};
  if (sc.eta_mode == StepSizeMode::kFixed) j["eta"] = sc.eta;
  j["inner"] = {{"mode", sc.inner.mode == InnerMode::kDirect ? "direct" : "gd"},
                {"max_inner", sc.inner.max_inner},
                {"inner_tol", sc.inner.inner_tol}};
  return j;
}

inline nlohmann::json result_json(Algorithm a, const Dims& d, const SolveResult& res, const SolverConfig& sc,
                                  const std::string& instance_path) {
  nlohmann::json j;
  j["algorithm"] = to_string(a);
  j["instance"] = instance_path;
  j["dims"] = to_json(d);
  j["final_sd"] = std::isnan(res.final_sd()) ? nlohmann::json(nullptr) : nlohmann::json(res.final_sd());
  j["final_objective"] = res.final_objective();
  j["converged"] = res.converged;
  j["iterations"] = res.iterations_run;
  j["total_time_s"] = res.total_time_s();
  j["stop_reason"] = to_string(res.stop_reason);
  j["eta"] = res.eta;
  j["lipschitz"] = res.lipschitz;
  j["rank_deficient_columns"] = res.rank_deficient_columns;
  j["config"] = solver_config_json(sc);
  return j;
}

// ---------------------------------------------------------------------------
// Phase transition grid

struct TrialRecord {
  Algorithm algorithm = Algorithm::kPermAltGDMin;
  Dims dims;
  int trial = -1;
  std::uint64_t seed = 0;
  double final_sd = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iters = 0;
  double time_s = 0.0;
  std::string status = "ok";  // "ok", "skipped:<reason>" or "error:<message>"

  bool ok() const { return status == "ok"; }
};

inline constexpr const char* kPhaseHeader =
    "algorithm,n,q,m,s,r,trial,seed,final_sd,converged,iters,time_s,status";

inline void write_phase_csv(std::ostream& os, const std::vector<TrialRecord>& rows) {
  os << kPhaseHeader << '\n';
  for (const auto& t : rows) {
    os << to_string(t.algorithm) << ',' << t.dims.n << ',' << t.dims.q << ',' << t.dims.m << ',' << t.dims.s
       << ',' << t.dims.r << ',';
    if (t.status.rfind("skipped", 0) == 0) {
      os << ",,,,,,";
    } else {
      os << t.trial << ',' << t.seed << ',' << csv::num(t.final_sd) << ',' << (t.converged ? "true" : "false")
         << ',' << t.iters << ',' << csv::seconds(t.time_s) << ',';
    }
    std::string status = t.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    os << status << '\n';
  }
}

// Reason a grid cell cannot be run, or empty when it is feasible.
inline std::string infeasible_reason(const Dims& d) {
  if (d.s <= 0 || d.m <= 0) return "nonpositive_dims";
  if (d.m % d.s != 0) return "s_does_not_divide_m";
  if (d.m / d.s < d.r) return "m_over_s_below_r";
  try {
    d.validate();
  } catch (const InvalidDims&) {
    return "invalid_dims";
  }
  return {};
}

// Runs `count` independent jobs on up to `threads` workers.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
}

// Seeds: the instance seed is shared by every cell and trial, so the sensing
// matrices (and U*, B* for a given r) are common; each trial resamples P* only.
inline Seeds trial_seeds(std::uint64_t master, const Dims& d, int trial) {
  return {derive_seed(master, {0}),
          derive_seed(master, {1, static_cast<std::uint64_t>(d.n), static_cast<std::uint64_t>(d.q),
                               static_cast<std::uint64_t>(d.m), static_cast<std::uint64_t>(d.s),
                               static_cast<std::uint64_t>(d.r), static_cast<std::uint64_t>(trial)})};
}

// Rows come back cell-major (n, q, m, s, r), then algorithm, then trial.
inline std::vector<TrialRecord> run_phase(const ExperimentConfig& cfg, std::ostream* log = &std::cerr) {
  if (cfg.trials < 1) throw InvalidDims("trials must be >= 1");
  std::vector<TrialRecord> rows;
  std::vector<std::size_t> pending;
  for (auto n : cfg.n)
    for (auto q : cfg.q)
      for (auto m : cfg.m)
        for (auto s : cfg.s)
          for (auto r : cfg.r) {
            const Dims d{n, q, m, r, s};
            const auto reason = infeasible_reason(d);
            for (auto a : cfg.algorithms) {
              if (!reason.empty()) {
                if (log) *log << "skipping cell n=" << n << " q=" << q << " m=" << m << " s=" << s << " r=" << r
                              << ": " << reason << '\n';
                TrialRecord rec;
                rec.algorithm = a;
                rec.dims = d;
                rec.status = "skipped:" + reason;
                rows.push_back(rec);
                continue;
              }
              for (int t = 0; t < cfg.trials; ++t) {
                TrialRecord rec;
                rec.algorithm = a;
                rec.dims = d;
                rec.trial = t;
                rec.seed = trial_seeds(cfg.seed, d, t).permutation;
                pending.push_back(rows.size());
                rows.push_back(rec);
              }
            }
          }

  std::mutex log_mutex;
  parallel_for(pending.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    auto& rec = rows[pending[i]];
    try {
      const auto problem = generate_synthetic(rec.dims, trial_seeds(cfg.seed, rec.dims, rec.trial));
      const auto sc = solver_config_for(rec.algorithm, cfg);
      const auto res = run_algorithm(rec.algorithm, problem.instance, sc, &problem.truth);
      rec.final_sd = res.final_sd();
      rec.converged = recovered(rec.final_sd);
      rec.iters = res.iterations_run;
      rec.time_s = res.total_time_s();
    } catch (const std::exception& e) {
      rec.status = std::string("error:") + e.what();
      if (log) {
        std::lock_guard lock(log_mutex);
        *log << "trial failed: " << e.what() << '\n';
      }
    }
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Runtime benchmark

struct BenchRow {
  Algorithm algorithm;
  int trial;
  int iter;
  double cum_time_s;
  double sd;
  double objective;
};

struct BenchSummary {
  Algorithm algorithm;
  std::vector<double> time_to_threshold_s;  // +inf when the threshold was never reached
  std::vector<double> final_sd;

  double median_time_to_threshold() const {
    if (time_to_threshold_s.empty()) return std::numeric_limits<double>::infinity();
    auto v = time_to_threshold_s;
    std::sort(v.begin(), v.end());
    const auto k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
  }
};

struct BenchReport {
  Dims dims;
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;
};

inline constexpr const char* kBenchHeader = "algorithm,trial,iter,cum_time_s,sd,objective";

inline double time_to_threshold(const SolveResult& res, double threshold = kRecoveryThreshold) {
  for (const auto& t : res.trace)
    if (t.sd <= threshold) return t.cum_time_s;
  return std::numeric_limits<double>::infinity();
}

// Every algorithm runs on the same instance per trial; trials resample P*.
// Runs are sequential and interleaved across algorithms so timings share
// machine conditions.
inline BenchReport run_bench(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw InvalidDims("trials must be >= 1");
  BenchReport rep;
  rep.dims = cfg.single_dims();
  rep.dims.validate();
  for (auto a : cfg.algorithms) rep.summary.push_back({a, {}, {}});
  for (int t = 0; t < cfg.trials; ++t) {
    const auto problem = generate_synthetic(rep.dims, trial_seeds(cfg.seed, rep.dims, t));
    for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
      const auto a = cfg.algorithms[ai];
      const auto res = run_algorithm(a, problem.instance, solver_config_for(a, cfg), &problem.truth);
      for (const auto& tr : res.trace) rep.rows.push_back({a, t, tr.iter, tr.cum_time_s, tr.sd, tr.objective});
      rep.summary[ai].time_to_threshold_s.push_back(time_to_threshold(res));
      rep.summary[ai].final_sd.push_back(res.final_sd());
    }
  }
  return rep;
}

inline void write_bench_csv(std::ostream& os, const BenchReport& rep) {
  os << kBenchHeader << '\n';
  for (const auto& r : rep.rows)
    os << to_string(r.algorithm) << ',' << r.trial << ',' << r.iter << ',' << csv::seconds(r.cum_time_s) << ','
       << csv::num(r.sd) << ',' << csv::num(r.objective) << '\n';
}

inline nlohmann::json bench_summary_json(const BenchReport& rep) {
  nlohmann::json j;
  j["dims"] = to_json(rep.dims);
  j["threshold"] = kRecoveryThreshold;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const auto& s : rep.summary) {
    nlohmann::json e;
    e["algorithm"] = to_string(s.algorithm);
    e["median_time_to_threshold_s"] = finite_or_null(s.median_time_to_threshold());
    auto& per = e["time_to_threshold_s"] = nlohmann::json::array();
    for (double v : s.time_to_threshold_s) per.push_back(finite_or_null(v));
    e["final_sd"] = s.final_sd;
    j["algorithms"].push_back(e);
  }
  return j;
}

}  // namespace permlrcs
