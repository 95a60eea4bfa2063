#include <algorithm>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "permlrcs/solvers.hpp"

using namespace permlrcs;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// P A_k U b_k for every k.
Matrix predict(const BlockPermutation& P, const Matrix& U, const Matrix& B, const ProblemInstance& inst) {
  Matrix out(inst.dims.m, inst.dims.q);
  for (Index k = 0; k < inst.dims.q; ++k) out.col(k) = inst.A[k] * (U * B.col(k));
  return P.apply(out);
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

const Dims kSmall{30, 60, 24, 2, 3};

}  // namespace

// ---------------------------------------------------------------------------
// Initialization

TEST(SpectralInit, RankOneRecoversDirection) {
  Rng rng(1);
  const Index n = 6, q = 4;
  const Vector x = detail::gaussian(n, 1, rng);
  const Vector b = detail::gaussian(q, 1, rng);
  CollapsedSystem c;
  c.Y = x * b.transpose();
  c.A.assign(q, Matrix::Identity(n, n));
  const Matrix U0 = spectral_init(c, 1);
  EXPECT_NEAR(std::abs(U0.col(0).dot(x.normalized())), 1.0, 1e-12);
}

TEST(SpectralInit, ImprovesWithMoreMeasurements) {
  std::vector<double> medians;
  for (Index ratio : {4, 8, 16}) {
    std::vector<double> sds;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto prob = generate_synthetic(Dims{50, 100, 2 * ratio, 2, 2}, seed);
      sds.push_back(subspace_distance(spectral_init(collapse(prob.instance), 2), prob.truth.Ustar));
    }
    medians.push_back(median(sds));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(SpectralInit, ZeroObservationsThrow) {
  auto prob = generate_synthetic(Dims{10, 10, 4, 1, 2}, 1);
  prob.instance.Y.setZero();
  EXPECT_THROW(spectral_init(collapse(prob.instance), 1), DegenerateError);
  EXPECT_THROW(spectral_init(collapse(prob.instance), 11), InvalidDims);
}

TEST(InitB, ExactForTrueSubspace) {
  const auto prob = generate_synthetic(kSmall, 2);
  const auto c = collapse(prob.instance);
  const auto init = init_b_collapsed(prob.truth.Ustar, c, prob.instance);
  EXPECT_LE(rel(init.B, prob.truth.Bstar), 1e-9);
  for (Index k = 0; k < kSmall.q; ++k)
    EXPECT_LE((c.Y.col(k) - c.A[k] * prob.truth.Ustar * init.B.col(k)).norm(), 1e-9 * (1 + c.Y.col(k).norm()));
  // The prediction uses the unpermuted sensing matrices.
  EXPECT_LE(rel(init.Yhat, prob.truth.Pstar.apply(prob.instance.Y, Direction::kInverse)), 1e-9);
}

TEST(InitB, ScalarRatio) {
  const auto prob = generate_synthetic(Dims{3, 2, 2, 1, 2}, 3);
  const auto c = collapse(prob.instance);
  Matrix U0(3, 1);
  U0 << 0.6, 0.0, 0.8;
  const auto init = init_b_collapsed(U0, c, prob.instance);
  for (Index k = 0; k < 2; ++k) {
    const double a = (c.A[k] * U0)(0, 0);
    EXPECT_NEAR(init.B(0, k), c.Y(0, k) / a, 1e-12 * std::abs(c.Y(0, k) / a));
  }
}

TEST(InitB, MatchesNormalEquations) {
  Rng rng(4);
  const auto prob = generate_synthetic(kSmall, 4);
  const auto c = collapse(prob.instance);
  const Matrix U0 = detail::orthonormal_basis(detail::gaussian(kSmall.n, kSmall.r, rng));
  const auto init = init_b_collapsed(U0, c, prob.instance);
  for (Index k = 0; k < kSmall.q; ++k) {
    const Vector ref = oracle::normal_equations(c.A[k] * U0, c.Y.col(k));
    EXPECT_LE((init.B.col(k) - ref).norm(), 1e-9 * ref.norm());
  }
}

TEST(InitB, RankDeficientColumnNamed) {
  auto prob = generate_synthetic(kSmall, 5);
  prob.instance.A[7].setZero();
  try {
    init_b_collapsed(prob.truth.Ustar, collapse(prob.instance), prob.instance);
    FAIL() << "expected DegenerateError";
  } catch (const DegenerateError& e) {
    EXPECT_NE(std::string(e.what()).find("column 7"), std::string::npos);
  }
}

TEST(StepSize, UnitSpectrum) {
  Matrix U0 = Matrix::Zero(4, 1);
  U0(0, 0) = 1;
  Matrix B0(1, 1);
  B0 << 1;
  EXPECT_NEAR(estimate_step_size_altgdmin(U0, B0, 100), 0.003, 1e-15);
}

TEST(StepSize, InverseSquareScaling) {
  Rng rng(6);
  const Matrix U0 = detail::orthonormal_basis(detail::gaussian(8, 2, rng));
  const Matrix B0 = detail::gaussian(2, 5, rng);
  const double base = estimate_step_size_altgdmin(U0, B0, 30);
  EXPECT_NEAR(estimate_step_size_altgdmin(U0, 4.0 * B0, 30), base / 16.0, 1e-12 * base);
}

TEST(StepSize, RankOneUsesNormProduct) {
  Rng rng(7);
  const Matrix U0 = detail::orthonormal_basis(detail::gaussian(5, 1, rng));
  const Matrix B0 = detail::gaussian(1, 6, rng);
  const double b2 = B0.squaredNorm();
  EXPECT_NEAR(estimate_step_size_altgdmin(U0, B0, 12), 0.3 / (12 * b2), 1e-12 / b2);
  EXPECT_THROW(estimate_step_size_altgdmin(U0, Matrix::Zero(1, 6), 12), DegenerateError);
}

// ---------------------------------------------------------------------------
// Updates

TEST(LsUpdateB, RecoversTruthAtTruth) {
  const auto prob = generate_synthetic(kSmall, 8);
  const auto ls = ls_update_b(prob.truth.Pstar, prob.truth.Ustar, prob.instance);
  EXPECT_LE(rel(ls.B, prob.truth.Bstar), 1e-9);
  EXPECT_LE((prob.instance.Y - ls.Yhat).squaredNorm(), 1e-18 * prob.instance.Y.squaredNorm());
  EXPECT_TRUE(ls.rank_deficient_columns.empty());
}

TEST(LsUpdateB, ResidualOrthogonalToColumnSpace) {
  Rng rng(9);
  const auto prob = generate_synthetic(kSmall, 9);
  const auto P = sample_s_local_permutation(kSmall.m, kSmall.s, 99);
  const Matrix U = detail::orthonormal_basis(detail::gaussian(kSmall.n, kSmall.r, rng));
  const auto ls = ls_update_b(P, U, prob.instance);
  for (Index k = 0; k < kSmall.q; ++k) {
    const Matrix M = P.apply(Matrix(prob.instance.A[k] * U));
    const Vector res = prob.instance.Y.col(k) - ls.Yhat.col(k);
    EXPECT_LE((M.transpose() * res).norm(), 1e-10 * M.norm() * prob.instance.Y.col(k).norm());
  }
}

TEST(LsUpdateB, MatchesNormalEquationsAcrossSeeds) {
  const Dims d{12, 5, 8, 2, 2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto prob = generate_synthetic(d, seed);
    const auto P = sample_s_local_permutation(d.m, d.s, seed + 1000);
    const Matrix U = detail::orthonormal_basis(detail::gaussian(d.n, d.r, rng));
    const auto ls = ls_update_b(P, U, prob.instance);
    const Matrix Yu = P.apply(prob.instance.Y, Direction::kInverse);
    for (Index k = 0; k < d.q; ++k) {
      const Vector ref = oracle::normal_equations(prob.instance.A[k] * U, Yu.col(k));
      EXPECT_LE((ls.B.col(k) - ref).norm(), 1e-9 * std::max(1.0, ref.norm())) << "seed " << seed;
    }
  }
}

TEST(LsUpdateB, RankDeficientColumnReported) {
  auto prob = generate_synthetic(kSmall, 10);
  prob.instance.A[3].setZero();
  const auto ls = ls_update_b(prob.truth.Pstar, prob.truth.Ustar, prob.instance);
  EXPECT_EQ(ls.rank_deficient_columns, (std::vector<Index>{3}));
  EXPECT_EQ(ls.B.col(3).norm(), 0.0);
  EXPECT_LE((ls.B.col(4) - prob.truth.Bstar.col(4)).norm(), 1e-9 * prob.truth.Bstar.col(4).norm());
}

TEST(GradientU, MatchesFiniteDifferences) {
  const Dims d{12, 6, 8, 2, 2};
  Rng rng(11);
  const auto prob = generate_synthetic(d, 11);
  const auto P = sample_s_local_permutation(d.m, d.s, 5);
  const Matrix U = detail::gaussian(d.n, d.r, rng);
  const Matrix B = detail::gaussian(d.r, d.q, rng);
  const Matrix grad = gradient_u(P, U, B, prob.instance, predict(P, U, B, prob.instance));
  const auto f = [&](const Matrix& V) { return objective(P, V, B, prob.instance); };
  const Matrix fd = oracle::finite_difference(f, U, 1e-6);
  EXPECT_LE(rel(2.0 * grad, fd), 1e-5);
}

TEST(GradientU, VanishesAtTruth) {
  const auto prob = generate_synthetic(kSmall, 12);
  const auto& t = prob.truth;
  const Matrix grad = gradient_u(t.Pstar, t.Ustar, t.Bstar, prob.instance, predict(t.Pstar, t.Ustar, t.Bstar, prob.instance));
  EXPECT_LE(grad.norm(), 1e-10 * t.Bstar.norm() * prob.instance.Y.norm());
}

TEST(GradientU, QuadraticInBWithoutData) {
  auto prob = generate_synthetic(Dims{10, 6, 8, 2, 2}, 13);
  prob.instance.Y.setZero();
  Rng rng(13);
  const Matrix U = detail::gaussian(10, 2, rng);
  const Matrix B = detail::gaussian(2, 6, rng);
  const auto id = BlockPermutation::identity(8, 2);
  const Matrix g1 = gradient_u(id, U, B, prob.instance, predict(id, U, B, prob.instance));
  const Matrix g3 = gradient_u(id, U, 3.0 * B, prob.instance, predict(id, U, 3.0 * B, prob.instance));
  EXPECT_LE(rel(g3, 9.0 * g1), 1e-13);
}

TEST(GdStepU, ZeroGradientIsFixedPoint) {
  Rng rng(14);
  const Matrix U = detail::orthonormal_basis(detail::gaussian(9, 3, rng));
  EXPECT_LE((gd_step_u(U, Matrix::Zero(9, 3), 0.1) - U).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GdStepU, SpanMatchesSvdOracle) {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix U = detail::orthonormal_basis(detail::gaussian(9, 3, rng));
    const Matrix G = detail::gaussian(9, 3, rng);
    const Matrix Un = gd_step_u(U, G, 0.2);
    EXPECT_LE((Un.transpose() * Un - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((Un * Un.transpose() - oracle::span_projector(U - 0.2 * G)).norm(), 1e-10);
    // Nonnegative diagonal of R means each column keeps its direction.
    for (Index j = 0; j < 3; ++j) EXPECT_GT((Un.transpose() * (U - 0.2 * G))(j, j), 0.0);
  }
}

TEST(GdStepU, ContinuousInStepSize) {
  Rng rng(16);
  const Matrix U = detail::orthonormal_basis(detail::gaussian(9, 3, rng));
  const Matrix G = detail::gaussian(9, 3, rng);
  EXPECT_LE((gd_step_u(U, G, 1e-12) - U).norm(), 1e-9);
}

TEST(GdStepU, RejectsBadInput) {
  Rng rng(17);
  const Matrix U = detail::orthonormal_basis(detail::gaussian(6, 2, rng));
  EXPECT_THROW(gd_step_u(U, U, 0.0), InvalidDims);
  EXPECT_THROW(gd_step_u(U, U / 0.5, 0.5), DegenerateError);
  EXPECT_THROW(gd_step_u(U, Matrix::Zero(6, 3), 0.5), DimensionError);
}

TEST(ExactUpdateU, ConsistentSystemRecoversX) {
  const auto prob = generate_synthetic(Dims{10, 8, 12, 2, 3}, 18);
  const Matrix U = exact_update_u(prob.truth.Pstar, prob.truth.Bstar, prob.instance);
  EXPECT_LE(rel(U * prob.truth.Bstar, prob.truth.X()), 1e-9);
}

TEST(ExactUpdateU, MatchesFlattenedKroneckerSolve) {
  for (const Dims& d : {Dims{4, 1, 6, 1, 2}, Dims{5, 4, 6, 2, 2}}) {
    Rng rng(19);
    const auto prob = generate_synthetic(d, 19);
    const auto P = sample_s_local_permutation(d.m, d.s, 3);
    const Matrix B = detail::gaussian(d.r, d.q, rng);
    const Matrix U = exact_update_u(P, B, prob.instance);
    const Matrix ref = oracle::flattened_u_solve(prob.instance.A, B, P.apply(prob.instance.Y, Direction::kInverse));
    EXPECT_LE(rel(U, ref), 1e-9) << "q=" << d.q;
  }
}

TEST(ExactUpdateU, DirectAndGradientModesAgree) {
  const Dims d{10, 8, 12, 2, 3};
  Rng rng(20);
  const auto prob = generate_synthetic(d, 20);
  const auto P = sample_s_local_permutation(d.m, d.s, 4);
  const Matrix B = detail::gaussian(d.r, d.q, rng);
  const Matrix direct = exact_update_u(P, B, prob.instance);
  ExactUpdateOptions opts;
  opts.inner = {InnerMode::kGradientDescent, 200000, 1e-13};
  const Matrix gd = exact_update_u(P, B, prob.instance, opts);
  EXPECT_LE(rel(gd, direct), 1e-6);
}

TEST(ExactUpdateU, SingularAndUnderdetermined) {
  const auto prob = generate_synthetic(Dims{10, 8, 12, 2, 3}, 21);
  const auto id = BlockPermutation::identity(12, 3);
  EXPECT_THROW(exact_update_u(id, Matrix::Zero(2, 8), prob.instance), SingularSystemError);
  ExactUpdateOptions gd;
  gd.inner.mode = InnerMode::kGradientDescent;
  EXPECT_THROW(exact_update_u(id, Matrix::Zero(2, 8), prob.instance, gd), SingularSystemError);

  const auto wide = generate_synthetic(Dims{10, 1, 4, 1, 2}, 21);
  EXPECT_THROW(exact_update_u(BlockPermutation::identity(4, 2), Matrix::Ones(1, 1), wide.instance), InvalidDims);
}

TEST(Lipschitz, BoundsCurvature) {
  Rng rng(22);
  const auto prob = generate_synthetic(Dims{10, 8, 12, 2, 3}, 22);
  const Matrix B = detail::gaussian(2, 8, rng);
  const double L = lipschitz_constant(B, prob.instance);
  // For the quadratic, ||grad(U) - grad(V)|| <= L ||U - V||.
  const auto id = BlockPermutation::identity(12, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix U = detail::gaussian(10, 2, rng), V = detail::gaussian(10, 2, rng);
    const Matrix gu = gradient_u(id, U, B, prob.instance, predict(id, U, B, prob.instance));
    const Matrix gv = gradient_u(id, V, B, prob.instance, predict(id, V, B, prob.instance));
    EXPECT_LE((gu - gv).norm(), L * (U - V).norm() * (1 + 1e-12));
  }
}

// ---------------------------------------------------------------------------
// Iterations

TEST(RunIteration, GroundTruthIsFixedPoint) {
  const auto prob = generate_synthetic(kSmall, 23);
  const auto& t = prob.truth;
  for (auto rule : {UpdateRule::kGradientQR, UpdateRule::kExactLeastSquares}) {
    IterationState st{t.Pstar, t.Ustar, t.Bstar,
                      t.Pstar.apply(predict(t.Pstar, t.Ustar, t.Bstar, prob.instance), Direction::kInverse)};
    IterationSettings set;
    set.rule = rule;
    set.eta = 1e-3;
    const auto out = run_iteration(st, prob.instance, set);
    EXPECT_EQ(st.P, t.Pstar);
    EXPECT_LE(out.objective, 1e-18 * prob.instance.Y.squaredNorm());
    EXPECT_LE(subspace_distance(detail::orthonormal_basis(st.U), t.Ustar), 1e-10);
  }
}

TEST(RunIteration, GradientRuleStaysOrthonormalAndPartialStepsDescend) {
  const auto prob = generate_synthetic(kSmall, 24);
  const auto c = collapse(prob.instance);
  const Matrix U0 = spectral_init(c, kSmall.r);
  auto init = init_b_collapsed(U0, c, prob.instance);
  IterationSettings set;
  set.eta = estimate_step_size_altgdmin(U0, init.B, kSmall.m);
  IterationState st{BlockPermutation::identity(kSmall.m, kSmall.s), U0, init.B, init.Yhat};
  for (int t = 0; t < 30; ++t) {
    const auto out = run_iteration(st, prob.instance, set, true);
    const auto& s = *out.substeps;
    EXPECT_LE(s.after_p, s.before * (1 + 1e-12) + 1e-300);
    EXPECT_LE(s.after_b, s.after_u * (1 + 1e-12) + 1e-300);
    EXPECT_LE((st.U.transpose() * st.U - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RunIteration, ExactRuleDescendsAtEverySubstep) {
  const auto prob = generate_synthetic(kSmall, 25);
  const auto c = collapse(prob.instance);
  const Matrix U0 = spectral_init(c, kSmall.r);
  auto init = init_b_collapsed(U0, c, prob.instance);
  IterationSettings set;
  set.rule = UpdateRule::kExactLeastSquares;
  IterationState st{BlockPermutation::identity(kSmall.m, kSmall.s), U0, init.B, init.Yhat};
  double prev = (prob.instance.Y - st.Z).squaredNorm();
  for (int t = 0; t < 10; ++t) {
    const auto out = run_iteration(st, prob.instance, set, true);
    const auto& s = *out.substeps;
    const double tol = 1e-9 * std::max(1.0, s.before);
    EXPECT_LE(s.after_p, s.before + tol);
    EXPECT_LE(s.after_u, s.after_p + tol);
    EXPECT_LE(s.after_b, s.after_u + tol);
    EXPECT_LE(out.objective, prev + 1e-9 * std::max(1.0, prev));
    prev = out.objective;
  }
}

// ---------------------------------------------------------------------------
// Full solvers

TEST(PermAltGDMin, RecoversOnSmallInstance) {
  const auto prob = generate_synthetic(kSmall, 26);
  const auto res = run_perm_altgdmin(prob.instance, {}, &prob.truth);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.stop_reason, StopReason::kSubspaceTolerance);
  EXPECT_EQ(res.P, prob.truth.Pstar);
  EXPECT_LE(relative_error_x(res.U, res.B, prob.truth), 1e-8);
}

TEST(PermAltGDMin, UnpermutedRecoveryRate) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto prob = generate_synthetic(Dims{50, 100, 30, 2, 1}, seed);
    ok += run_perm_altgdmin(prob.instance, {}, &prob.truth).converged;
  }
  EXPECT_GE(ok, 8);
}

TEST(PermAltGDMin, TraceShape) {
  const auto prob = generate_synthetic(kSmall, 27);
  SolverConfig cfg;
  cfg.max_iters = 15;
  const auto res = run_perm_altgdmin(prob.instance, cfg, &prob.truth);
  ASSERT_EQ(res.trace.size(), static_cast<std::size_t>(res.iterations_run) + 1);
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    EXPECT_EQ(res.trace[i].iter, static_cast<int>(i));
    if (i) EXPECT_GE(res.trace[i].cum_time_s, res.trace[i - 1].cum_time_s);
  }
  EXPECT_GT(res.eta, 0.0);
}

TEST(PermAltGDMin, Deterministic) {
  const auto prob = generate_synthetic(kSmall, 28);
  const auto a = run_perm_altgdmin(prob.instance, {}, &prob.truth);
  const auto b = run_perm_altgdmin(prob.instance, {}, &prob.truth);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.B, b.B);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].sd, b.trace[i].sd);
    EXPECT_EQ(a.trace[i].objective, b.trace[i].objective);
  }
}

TEST(PermAltGDMin, WithoutGroundTruth) {
  const auto prob = generate_synthetic(kSmall, 29);
  SolverConfig cfg;
  cfg.stop_tol = 1e-8;
  const auto res = run_perm_altgdmin(prob.instance, cfg);
  EXPECT_TRUE(std::isnan(res.final_sd()));
  EXPECT_NE(res.stop_reason, StopReason::kSubspaceTolerance);
  EXPECT_TRUE(res.converged);
}

TEST(PermAltMin, ExactModeRecovers) {
  const auto prob = generate_synthetic(kSmall, 30);
  const auto res = run_perm_altmin(prob.instance, {}, &prob.truth);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.P, prob.truth.Pstar);
}

TEST(PermAltMin, GradientModeRecovers) {
  const auto prob = generate_synthetic(kSmall, 31);
  SolverConfig cfg;
  cfg.inner = {InnerMode::kGradientDescent, 8, 1e-14};
  const auto res = run_perm_altmin(prob.instance, cfg, &prob.truth);
  EXPECT_TRUE(res.converged);
  EXPECT_GT(res.lipschitz, 0.0);
}

TEST(PermAltMin, ObjectiveNonIncreasing) {
  const auto prob = generate_synthetic(kSmall, 32);
  const auto res = run_perm_altmin(prob.instance, {}, &prob.truth);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    EXPECT_LE(res.trace[i].objective,
              res.trace[i - 1].objective + 1e-9 * std::max(1.0, res.trace[i - 1].objective));
}

TEST(Baseline, SingletonBlocksMatchUnpermutedSolver) {
  const auto prob = generate_synthetic(Dims{30, 60, 24, 2, 1}, 33);
  const auto base = run_lrcs_collapsed_baseline(prob.instance, {}, BaselineVariant::kAltGDMin, &prob.truth);
  const auto perm = run_perm_altgdmin(prob.instance, {}, &prob.truth);
  EXPECT_TRUE(base.converged);
  ASSERT_EQ(base.trace.size(), perm.trace.size());
  for (std::size_t i = 0; i < base.trace.size(); ++i) EXPECT_EQ(base.trace[i].sd, perm.trace[i].sd);
}

TEST(Baseline, BlindToThePermutation) {
  const auto a = generate_synthetic(kSmall, Seeds{77, 1});
  const auto b = generate_synthetic(kSmall, Seeds{77, 2});
  ASSERT_NE(a.truth.Pstar, b.truth.Pstar);
  for (auto v : {BaselineVariant::kAltGDMin, BaselineVariant::kAltMin}) {
    SolverConfig cfg;
    cfg.max_iters = 40;
    const auto ra = run_lrcs_collapsed_baseline(a.instance, cfg, v, &a.truth);
    const auto rb = run_lrcs_collapsed_baseline(b.instance, cfg, v, &b.truth);
    const auto len = std::min(ra.trace.size(), rb.trace.size());
    for (std::size_t i = 0; i < len; ++i) EXPECT_NEAR(ra.trace[i].sd, rb.trace[i].sd, 1e-9);
    EXPECT_TRUE(ra.P.is_identity());
  }
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  cfg.max_iters = -1;
  EXPECT_THROW(cfg.validate(), InvalidDims);
  cfg = {};
  cfg.eta_mode = StepSizeMode::kFixed;
  cfg.eta = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidDims);
}
