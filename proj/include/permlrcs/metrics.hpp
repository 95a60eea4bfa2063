#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "permlrcs/core_model.hpp"

namespace permlrcs {

// Recovery criterion used for phase transitions: SD(U, U*) <= 1e-10.
inline constexpr double kRecoveryThreshold = 1e-10;

namespace detail {

inline void require_orthonormal(const Matrix& U, const char* name, double tol = 1e-8) {
  const Matrix g = U.transpose() * U;
  if ((g - Matrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff() > tol)
    throw DegenerateError(std::string(name) + " does not have orthonormal columns");
}

}  // namespace detail

// ||(I - U* U*^T) U||_2 without n x n intermediates. The residual
// W = U - U* (U*^T U) is n x r; its squared 2-norm is the largest eigenvalue
// of the r x r Gram matrix W^T W.
inline double subspace_distance(const Matrix& U, const Matrix& Ustar) {
  if (U.rows() != Ustar.rows() || U.cols() != Ustar.cols())
    throw DimensionError("subspace_distance: U and U* shapes differ");
  detail::require_orthonormal(U, "U");
  detail::require_orthonormal(Ustar, "U*");
  const Matrix W = U - Ustar * (Ustar.transpose() * U);
  const Matrix G = W.transpose() * W;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const double top = std::max(0.0, eig.eigenvalues().maxCoeff());
  return std::min(1.0, std::sqrt(top));
}

// ||U B - X*||_F / ||X*||_F
inline double relative_error_x(const Matrix& U, const Matrix& B, const Matrix& Xstar) {
  if (U.cols() != B.rows() || U.rows() != Xstar.rows() || B.cols() != Xstar.cols())
    throw DimensionError("relative_error_x: inconsistent shapes");
  const double denom = Xstar.norm();
  if (!(denom > 0.0)) throw DegenerateError("relative_error_x: X* is zero");
  return (U * B - Xstar).norm() / denom;
}

inline double relative_error_x(const Matrix& U, const Matrix& B, const GroundTruth& truth) {
  return relative_error_x(U, B, truth.X());
}

// Fraction of rows whose source index differs.
inline double permutation_row_error(const BlockPermutation& P, const BlockPermutation& Pstar) {
  if (P.size() != Pstar.size() || P.block_size() != Pstar.block_size())
    throw DimensionError("permutation_row_error: size mismatch");
  if (P.size() == 0) return 0.0;
  Index wrong = 0;
  for (Index j = 0; j < P.size(); ++j) wrong += P.source(j) != Pstar.source(j);
  return static_cast<double>(wrong) / static_cast<double>(P.size());
}

inline bool recovered(double sd, double threshold = kRecoveryThreshold) { return sd <= threshold; }

}  // namespace permlrcs
