#pragma once

// Perm-AltGDMin, Perm-AltMin and the collapsed-measurement LRCS baselines.
//
// Every solver shares the same initialization: collapse s-blocks of rows to
// annihilate the unknown permutation, take the top-r left singular vectors of
// M0 = [A_c,k^T y_c,k]_k, and fit B column by column on the collapsed system.
// Iterations then alternate
//   P <- exact block-wise linear assignment given (U, B)
//   U <- one gradient step + QR (AltGDMin) or exact least squares (AltMin)
//   B <- column-wise least squares given (P, U)

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "permlrcs/assignment.hpp"
#include "permlrcs/core_model.hpp"
#include "permlrcs/metrics.hpp"

namespace permlrcs {

// Error raised from inside the iteration loop; carries the iteration index.
class SolverError : public Error {
 public:
  SolverError(int iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

struct FactorPair {
  Matrix U;  // n x r
  Matrix B;  // r x q
};

enum class StepSizeMode { kAltGDMinDefault, kFixed };
enum class InnerMode { kDirect, kGradientDescent };

struct InnerSolverConfig {
  InnerMode mode = InnerMode::kDirect;
  int max_inner = 10;
  double inner_tol = 1e-14;  // on ||grad||_F relative to the gradient at U = 0
};

struct SolverConfig {
  int max_iters = 500;
  StepSizeMode eta_mode = StepSizeMode::kAltGDMinDefault;
  double eta = 0.0;  // used when eta_mode == kFixed
  InnerSolverConfig inner;
  double stop_tol = kRecoveryThreshold;
  int stall_window = 5;
  bool trace_substeps = false;

  void validate() const {
    if (max_iters < 1) throw InvalidDims("max_iters must be >= 1");
    if (!(stop_tol > 0.0)) throw InvalidDims("stop_tol must be positive");
    if (eta_mode == StepSizeMode::kFixed && !(eta > 0.0)) throw InvalidDims("fixed eta must be positive");
    if (inner.max_inner < 1) throw InvalidDims("max_inner must be >= 1");
    if (!(inner.inner_tol > 0.0)) throw InvalidDims("inner_tol must be positive");
    if (stall_window < 1) throw InvalidDims("stall_window must be >= 1");
  }
};

// Objective after each sub-step of one outer iteration.
struct SubstepObjectives {
  double before = 0.0;
  double after_p = 0.0;
  double after_u = 0.0;
  double after_b = 0.0;
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double sd = std::numeric_limits<double>::quiet_NaN();  // NaN without ground truth
  double cum_time_s = 0.0;
  std::optional<SubstepObjectives> substeps;
};

enum class StopReason { kMaxIterations, kSubspaceTolerance, kObjectiveStalled, kZeroObjective };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kSubspaceTolerance: return "subspace_tolerance";
    case StopReason::kObjectiveStalled: return "objective_stalled";
    case StopReason::kZeroObjective: return "zero_objective";
  }
  return "unknown";
}

struct SolveResult {
  Matrix U;  // orthonormal for AltGDMin; raw least-squares factor for AltMin
  Matrix B;
  BlockPermutation P;
  std::vector<TraceRecord> trace;  // iterations_run + 1 entries, trace[0] is post-init
  bool converged = false;
  int iterations_run = 0;
  StopReason stop_reason = StopReason::kMaxIterations;
  double eta = 0.0;        // AltGDMin step size actually used
  double lipschitz = 0.0;  // AltMin-GD inner step constant
  std::vector<Index> rank_deficient_columns;  // from the last B-update

  double final_sd() const { return trace.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.back().sd; }
  double final_objective() const { return trace.empty() ? 0.0 : trace.back().objective; }
  double total_time_s() const { return trace.empty() ? 0.0 : trace.back().cum_time_s; }
};

// ---------------------------------------------------------------------------
// Initialization

// Top-r left singular vectors of M0, whose k-th column is A_c,k^T y_c,k.
inline Matrix spectral_init(const CollapsedSystem& collapsed, Index r) {
  if (collapsed.A.empty()) throw DimensionError("spectral_init: empty collapsed system");
  const Index n = collapsed.A.front().cols();
  const Index q = static_cast<Index>(collapsed.A.size());
  if (r < 1 || r > n) throw InvalidDims("spectral_init: need 1 <= r <= n");
  if (collapsed.Y.cols() != q) throw DimensionError("spectral_init: Y_c must have q columns");

  Matrix M0(n, q);
  for (Index k = 0; k < q; ++k) {
    if (collapsed.A[k].rows() != collapsed.Y.rows() || collapsed.A[k].cols() != n)
      throw DimensionError("spectral_init: A_c," + std::to_string(k) + " has wrong shape");
    M0.col(k).noalias() = collapsed.A[k].transpose() * collapsed.Y.col(k);
  }
  if (!(M0.cwiseAbs().maxCoeff() > 0.0))
    throw DegenerateError("spectral_init: M0 is zero (no informative observations)");
  Eigen::BDCSVD<Matrix> svd(M0, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(r);
}

struct InitB {
  Matrix B;     // r x q
  Matrix Yhat;  // m x q, A_k U0 b_k with the full, unpermuted A_k
};

// b_k = (A_c,k U0)^+ y_c,k on the collapsed system; prediction on the full one.
inline InitB init_b_collapsed(const Matrix& U0, const CollapsedSystem& collapsed,
                              const ProblemInstance& inst) {
  const Index q = static_cast<Index>(collapsed.A.size());
  const Index r = U0.cols();
  if (collapsed.rows() < r)
    throw InvalidDims("init_b_collapsed: m/s=" + std::to_string(collapsed.rows()) +
                      " < r=" + std::to_string(r));
  if (static_cast<Index>(inst.A.size()) != q) throw DimensionError("init_b_collapsed: column count mismatch");
  InitB out{Matrix(r, q), Matrix(inst.dims.m, q)};
  for (Index k = 0; k < q; ++k) {
    const Matrix M = collapsed.A[k] * U0;
    Eigen::ColPivHouseholderQR<Matrix> qr(M);
    if (qr.rank() < r)
      throw DegenerateError("init_b_collapsed: A_c,k U0 is rank deficient at column " + std::to_string(k));
    out.B.col(k) = qr.solve(collapsed.Y.col(k));
    out.Yhat.col(k).noalias() = inst.A[k] * (U0 * out.B.col(k));
  }
  return out;
}

// 0.3 / (m sigma_max(U0 B0)^2)
inline double estimate_step_size_altgdmin(const Matrix& U0, const Matrix& B0, Index m) {
  const double smax = detail::sigma_max(U0 * B0);
  if (!(smax > 0.0)) throw DegenerateError("estimate_step_size_altgdmin: U0 B0 is zero");
  return 0.3 / (static_cast<double>(m) * smax * smax);
}

// ---------------------------------------------------------------------------
// Updates

struct LsUpdate {
  Matrix B;     // r x q
  Matrix Yhat;  // m x q, P A_k U b_k
  std::vector<Index> rank_deficient_columns;
};

// b_k = argmin_b ||y_k - P A_k U b||. Rank-deficient columns get the
// minimum-norm solution and are reported; other columns are unaffected.
inline LsUpdate ls_update_b(const BlockPermutation& P, const Matrix& U, const ProblemInstance& inst) {
  const auto& d = inst.dims;
  if (U.rows() != d.n || P.size() != d.m) throw DimensionError("ls_update_b: inconsistent shapes");
  const Index r = U.cols();
  if (d.m < r) throw InvalidDims("ls_update_b: m < r");
  const Matrix Yu = P.apply(inst.Y, Direction::kInverse);
  LsUpdate out{Matrix(r, d.q), Matrix(d.m, d.q), {}};
  Matrix fit(d.m, d.q);
  Matrix M(d.m, r);
  Eigen::HouseholderQR<Matrix> qr(d.m, r);
  for (Index k = 0; k < d.q; ++k) {
    // Column-wise products stream A_k once per column; faster than GEMM at small r.
    for (Index j = 0; j < r; ++j) M.col(j).noalias() = inst.A[k] * U.col(j);
    qr.compute(M);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    if (!(diag.minCoeff() > 1e-12 * diag.maxCoeff())) {
      out.rank_deficient_columns.push_back(k);
      out.B.col(k) = M.completeOrthogonalDecomposition().solve(Yu.col(k));
    } else {
      out.B.col(k) = qr.solve(Yu.col(k));
    }
    fit.col(k).noalias() = M * out.B.col(k);
  }
  out.Yhat = P.apply(fit);
  return out;
}

// sum_k (P A_k)^T (yhat_k - y_k) b_k^T, with Yhat(:, k) = P A_k U b_k. This is
// half the gradient of the squared loss; the factor 2 is absorbed into eta.
inline Matrix gradient_u(const BlockPermutation& P, const Matrix& U, const Matrix& B,
                         const ProblemInstance& inst, const Matrix& Yhat) {
  const auto& d = inst.dims;
  if (U.rows() != d.n || U.cols() != B.rows() || B.cols() != d.q || Yhat.rows() != d.m ||
      Yhat.cols() != d.q || P.size() != d.m)
    throw DimensionError("gradient_u: inconsistent shapes");
  const Matrix R = P.apply(Yhat - inst.Y, Direction::kInverse);
  Matrix G(d.n, d.q);
  for (Index k = 0; k < d.q; ++k) G.col(k).noalias() = inst.A[k].transpose() * R.col(k);
  return G * B.transpose();
}

// Q factor of QR(U - eta grad), with R's diagonal made nonnegative.
inline Matrix gd_step_u(const Matrix& U, const Matrix& grad, double eta) {
  if (!(eta > 0.0)) throw InvalidDims("gd_step_u: eta must be positive");
  if (U.rows() != grad.rows() || U.cols() != grad.cols()) throw DimensionError("gd_step_u: shape mismatch");
  const Matrix M = U - eta * grad;
  Eigen::HouseholderQR<Matrix> qr(M);
  const auto& R = qr.matrixQR();
  const double scale = M.norm();
  for (Index j = 0; j < M.cols(); ++j)
    if (!(std::abs(R(j, j)) > 1e-13 * scale) || !std::isfinite(R(j, j)))
      throw DegenerateError("gd_step_u: U - eta*grad is rank deficient");
  Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
  for (Index j = 0; j < M.cols(); ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

// L = sum_k sigma_max(A_k)^2 ||b_k||^2, the Lipschitz constant of the
// U-gradient for fixed B.
inline double lipschitz_constant(const Matrix& B, const ProblemInstance& inst) {
  double L = 0.0;
  for (Index k = 0; k < inst.dims.q; ++k) {
    const double bn = B.col(k).squaredNorm();
    if (bn == 0.0) continue;
    const auto& A = inst.A[k];
    const Matrix gram = A.rows() <= A.cols() ? Matrix(A * A.transpose()) : Matrix(A.transpose() * A);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    L += eig.eigenvalues().maxCoeff() * bn;
  }
  return L;
}

struct ExactUpdateOptions {
  InnerSolverConfig inner;
  const Matrix* warm_start = nullptr;     // gd mode starting point (zero if absent)
  std::optional<double> lipschitz;        // gd mode step 1/L; computed from B if absent
};

// argmin_U sum_k ||y_k - P A_k U b_k||^2 (no orthonormalization).
//
// direct: solves the nr x nr normal equations
//   [sum_k (b_k b_k^T) kron (A_k^T A_k)] vec(U) = sum_k b_k kron (A_k^T P^T y_k)
// (P^T P = I removes P from the left-hand side).
// gd: inner gradient descent with step 1/L from the warm start.
inline Matrix exact_update_u(const BlockPermutation& P, const Matrix& B, const ProblemInstance& inst,
                             const ExactUpdateOptions& opts = {}) {
  const auto& d = inst.dims;
  const Index n = d.n, r = B.rows();
  if (B.cols() != d.q || P.size() != d.m) throw DimensionError("exact_update_u: inconsistent shapes");
  const Matrix Yu = P.apply(inst.Y, Direction::kInverse);

  if (opts.inner.mode == InnerMode::kDirect) {
    if (d.m * d.q < n * r) throw InvalidDims("exact_update_u: direct mode needs mq >= nr");
    Matrix H = Matrix::Zero(n * r, n * r);
    Vector rhs = Vector::Zero(n * r);
    Matrix gram(n, n);
    for (Index k = 0; k < d.q; ++k) {
      const auto b = B.col(k);
      if (b.squaredNorm() == 0.0) continue;
      const auto& A = inst.A[k];
      gram.noalias() = A.transpose() * A;
      const Vector aty = A.transpose() * Yu.col(k);
      for (Index j = 0; j < r; ++j) {
        rhs.segment(j * n, n) += b(j) * aty;
        for (Index l = 0; l <= j; ++l) H.block(j * n, l * n, n, n) += (b(j) * b(l)) * gram;
      }
    }
    Eigen::LLT<Matrix, Eigen::Lower> llt(H);
    if (llt.info() != Eigen::Success)
      throw SingularSystemError("exact_update_u: normal equations are singular");
    const Vector u = llt.solve(rhs);
    if (!u.allFinite()) throw SingularSystemError("exact_update_u: non-finite solution");
    return Eigen::Map<const Matrix>(u.data(), n, r);
  }

  const double L = opts.lipschitz ? *opts.lipschitz : lipschitz_constant(B, inst);
  if (!std::isfinite(L) || !(L > 0.0)) throw SingularSystemError("exact_update_u: non-finite or zero L");
  Matrix U = opts.warm_start ? *opts.warm_start : Matrix::Zero(n, r);
  if (U.rows() != n || U.cols() != r) throw DimensionError("exact_update_u: warm start has wrong shape");

  Matrix G(n, d.q);
  for (Index k = 0; k < d.q; ++k) G.col(k).noalias() = inst.A[k].transpose() * Yu.col(k);
  const double scale = (G * B.transpose()).norm();
  if (scale == 0.0) return Matrix::Zero(n, r);

  Matrix grad(n, r);
  for (int it = 0; it < opts.inner.max_inner; ++it) {
    for (Index k = 0; k < d.q; ++k)
      G.col(k).noalias() = inst.A[k].transpose() * (inst.A[k] * (U * B.col(k)) - Yu.col(k));
    grad.noalias() = G * B.transpose();
    if (grad.norm() <= opts.inner.inner_tol * scale) break;
    U -= grad / L;
  }
  return U;
}

// ---------------------------------------------------------------------------
// Iterations

enum class UpdateRule { kGradientQR, kExactLeastSquares };

// Solver state between outer iterations. Z holds the unpermuted prediction
// A_k U b_k, which is what the permutation update matches Y against.
struct IterationState {
  BlockPermutation P;
  Matrix U;
  Matrix B;
  Matrix Z;
};

struct IterationSettings {
  UpdateRule rule = UpdateRule::kGradientQR;
  bool estimate_permutation = true;
  double eta = 0.0;
  ExactUpdateOptions exact;
};

struct IterationOutcome {
  double objective = 0.0;
  std::vector<Index> rank_deficient_columns;
  std::optional<SubstepObjectives> substeps;
};

inline IterationOutcome run_iteration(IterationState& st, const ProblemInstance& inst,
                                      const IterationSettings& set, bool record_substeps = false) {
  IterationOutcome out;
  SubstepObjectives sub;
  if (record_substeps) sub.before = (inst.Y - st.P.apply(st.Z)).squaredNorm();

  if (set.estimate_permutation) st.P = update_permutation(inst.Y, st.Z, inst.dims.s);
  if (record_substeps) sub.after_p = (inst.Y - st.P.apply(st.Z)).squaredNorm();

  if (set.rule == UpdateRule::kGradientQR) {
    const Matrix grad = gradient_u(st.P, st.U, st.B, inst, st.P.apply(st.Z));
    st.U = gd_step_u(st.U, grad, set.eta);
  } else {
    ExactUpdateOptions opts = set.exact;
    opts.warm_start = &st.U;
    st.U = exact_update_u(st.P, st.B, inst, opts);
  }
  if (record_substeps) sub.after_u = objective(st.P, st.U, st.B, inst);

  auto ls = ls_update_b(st.P, st.U, inst);
  st.B = std::move(ls.B);
  st.Z = st.P.apply(ls.Yhat, Direction::kInverse);
  out.objective = (inst.Y - ls.Yhat).squaredNorm();
  out.rank_deficient_columns = std::move(ls.rank_deficient_columns);
  if (record_substeps) {
    sub.after_b = out.objective;
    out.substeps = sub;
  }
  return out;
}

namespace detail {

struct Variant {
  UpdateRule rule = UpdateRule::kGradientQR;
  bool estimate_permutation = true;
  Index step_scale_m = 0;  // m in eta = 0.3 / (m sigma^2)
};

inline double sd_of(const Matrix& U, UpdateRule rule, const GroundTruth* truth) {
  if (!truth) return std::numeric_limits<double>::quiet_NaN();
  if (rule == UpdateRule::kGradientQR) return subspace_distance(U, truth->Ustar);
  return subspace_distance(orthonormal_basis(U), truth->Ustar);
}

inline SolveResult run_solver(const ProblemInstance& inst, const SolverConfig& cfg, const Variant& variant,
                              const GroundTruth* truth) {
  using clock = std::chrono::steady_clock;
  inst.validate();
  cfg.validate();
  if (truth && (truth->Ustar.rows() != inst.dims.n || truth->Ustar.cols() != inst.dims.r))
    throw DimensionError("ground truth U* does not match instance dims");

  SolveResult res;
  double elapsed = 0.0;
  auto t0 = clock::now();
  auto lap = [&] {
    const auto now = clock::now();
    elapsed += std::chrono::duration<double>(now - t0).count();
  };

  const auto collapsed = collapse(inst);
  const Matrix U0 = spectral_init(collapsed, inst.dims.r);
  auto init = init_b_collapsed(U0, collapsed, inst);

  IterationSettings set;
  set.rule = variant.rule;
  set.estimate_permutation = variant.estimate_permutation;
  if (variant.rule == UpdateRule::kGradientQR) {
    set.eta = cfg.eta_mode == StepSizeMode::kFixed
                  ? cfg.eta
                  : estimate_step_size_altgdmin(U0, init.B, variant.step_scale_m);
    res.eta = set.eta;
  } else {
    set.exact.inner = cfg.inner;
    if (cfg.inner.mode == InnerMode::kGradientDescent) {
      res.lipschitz = lipschitz_constant(init.B, inst);
      set.exact.lipschitz = res.lipschitz;
    }
  }

  IterationState st{BlockPermutation::identity(inst.dims.m, inst.dims.s), U0, std::move(init.B),
                    std::move(init.Yhat)};
  lap();

  TraceRecord rec;
  rec.iter = 0;
  rec.objective = (inst.Y - st.Z).squaredNorm();
  rec.sd = sd_of(st.U, variant.rule, truth);
  rec.cum_time_s = elapsed;
  res.trace.push_back(rec);

  for (int t = 1; t <= cfg.max_iters; ++t) {
    t0 = clock::now();
    IterationOutcome out;
    try {
      out = run_iteration(st, inst, set, cfg.trace_substeps);
    } catch (const SolverError&) {
      throw;
    } catch (const Error& e) {
      throw SolverError(t, e.what());
    }
    lap();

    rec = {};
    rec.iter = t;
    rec.objective = out.objective;
    rec.sd = sd_of(st.U, variant.rule, truth);
    rec.cum_time_s = elapsed;
    rec.substeps = out.substeps;
    res.trace.push_back(rec);
    res.iterations_run = t;
    res.rank_deficient_columns = std::move(out.rank_deficient_columns);

    if (truth && rec.sd <= cfg.stop_tol) {
      res.stop_reason = StopReason::kSubspaceTolerance;
      break;
    }
    if (rec.objective == 0.0) {
      res.stop_reason = StopReason::kZeroObjective;
      break;
    }
    if (t >= cfg.stall_window) {
      const double past = res.trace[static_cast<std::size_t>(t - cfg.stall_window)].objective;
      if (past - rec.objective <= cfg.stop_tol * past) {
        res.stop_reason = StopReason::kObjectiveStalled;
        break;
      }
    }
  }

  res.U = std::move(st.U);
  res.B = std::move(st.B);
  res.P = std::move(st.P);
  if (truth) {
    res.converged = recovered(res.final_sd());
  } else {
    const double ynorm = inst.Y.norm();
    res.converged = ynorm == 0.0 || std::sqrt(res.final_objective()) <= cfg.stop_tol * ynorm;
  }
  return res;
}

}  // namespace detail

inline SolveResult run_perm_altgdmin(const ProblemInstance& inst, const SolverConfig& cfg,
                                     const GroundTruth* truth = nullptr) {
  return detail::run_solver(inst, cfg, {UpdateRule::kGradientQR, true, inst.dims.m}, truth);
}

inline SolveResult run_perm_altmin(const ProblemInstance& inst, const SolverConfig& cfg,
                                   const GroundTruth* truth = nullptr) {
  return detail::run_solver(inst, cfg, {UpdateRule::kExactLeastSquares, true, inst.dims.m}, truth);
}

enum class BaselineVariant { kAltGDMin, kAltMin };

// Plain LRCS on the collapsed measurements; no permutation estimate. The
// collapsed rows are sums of s Gaussian rows, so E[A_c^T A_c] = m I and the
// AltGDMin step keeps the original m in its scale.
inline SolveResult run_lrcs_collapsed_baseline(const ProblemInstance& inst, const SolverConfig& cfg,
                                               BaselineVariant variant, const GroundTruth* truth = nullptr) {
  inst.validate();
  auto collapsed = collapse(inst);
  ProblemInstance reduced;
  reduced.dims = {inst.dims.n, inst.dims.q, collapsed.rows(), inst.dims.r, 1};
  reduced.Y = std::move(collapsed.Y);
  reduced.A = std::move(collapsed.A);
  const detail::Variant v{variant == BaselineVariant::kAltGDMin ? UpdateRule::kGradientQR
                                                                 : UpdateRule::kExactLeastSquares,
                          false, inst.dims.m};
  auto res = detail::run_solver(reduced, cfg, v, truth);
  res.P = BlockPermutation::identity(inst.dims.m, inst.dims.s);
  return res;
}

}  // namespace permlrcs
