#include <gtest/gtest.h>

#include "oracles.hpp"
#include "permlrcs/metrics.hpp"

using namespace permlrcs;

TEST(SubspaceDistance, SameSpanIsZero) {
  Rng rng(1);
  const Matrix U = detail::orthonormal_basis(detail::gaussian(10, 3, rng));
  EXPECT_LE(subspace_distance(U, U), 1e-14);
  const Matrix Q = detail::orthonormal_basis(detail::gaussian(3, 3, rng));
  EXPECT_LE(subspace_distance(U * Q, U), 1e-14);
  EXPECT_LE(subspace_distance(-U, U), 1e-14);
}

TEST(SubspaceDistance, OrthogonalSpansAreOne) {
  const Matrix I = Matrix::Identity(6, 6);
  EXPECT_DOUBLE_EQ(subspace_distance(I.leftCols(2), I.middleCols(2, 2)), 1.0);
}

TEST(SubspaceDistance, KnownAngle) {
  const double theta = 0.3;
  Matrix U(2, 1), V(2, 1);
  U << 1, 0;
  V << std::cos(theta), std::sin(theta);
  EXPECT_NEAR(subspace_distance(V, U), std::sin(theta), 1e-15);
}

TEST(SubspaceDistance, SmallAnglesKeepRelativeAccuracy) {
  for (double theta : {1e-6, 1e-9, 1e-12}) {
    Matrix U(3, 1), V(3, 1);
    U << 1, 0, 0;
    V << std::cos(theta), std::sin(theta), 0;
    EXPECT_NEAR(subspace_distance(V, U), theta, 1e-6 * theta);
  }
}

TEST(SubspaceDistance, SymmetricAndBounded) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix U = detail::orthonormal_basis(detail::gaussian(12, 3, rng));
    const Matrix V = detail::orthonormal_basis(detail::gaussian(12, 3, rng));
    const double d = subspace_distance(U, V);
    EXPECT_NEAR(d, subspace_distance(V, U), 1e-12);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_NEAR(d, oracle::projector_subspace_distance(U, V), 1e-12);
  }
}

TEST(SubspaceDistance, RotationInvariant) {
  Rng rng(3);
  const Matrix U = detail::orthonormal_basis(detail::gaussian(9, 2, rng));
  const Matrix V = detail::orthonormal_basis(detail::gaussian(9, 2, rng));
  const Matrix Q1 = detail::orthonormal_basis(detail::gaussian(2, 2, rng));
  const Matrix Q2 = detail::orthonormal_basis(detail::gaussian(2, 2, rng));
  EXPECT_NEAR(subspace_distance(U * Q1, V * Q2), subspace_distance(U, V), 1e-12);
}

TEST(SubspaceDistance, RejectsNonOrthonormalInput) {
  const Matrix I = Matrix::Identity(4, 2);
  EXPECT_THROW(subspace_distance(2.0 * I, I), DegenerateError);
  EXPECT_THROW(subspace_distance(I, Matrix::Identity(4, 1)), DimensionError);
}

TEST(RelativeError, ExactAndZero) {
  Rng rng(4);
  const Matrix U = detail::gaussian(5, 2, rng);
  const Matrix B = detail::gaussian(2, 4, rng);
  EXPECT_LE(relative_error_x(U, B, U * B), 1e-15);
  EXPECT_DOUBLE_EQ(relative_error_x(U, Matrix::Zero(2, 4), U * B), 1.0);
}

TEST(RelativeError, HandComputed) {
  Matrix U(2, 1), B(1, 2), X(2, 2);
  U << 1, 0;
  B << 1, 1;
  X << 1, 1, 1, 1;  // U B = [1 1; 0 0], error norm 1 + 1 -> sqrt(2), ||X|| = 2
  EXPECT_NEAR(relative_error_x(U, B, X), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_THROW(relative_error_x(U, B, Matrix::Zero(2, 2)), DegenerateError);
}

TEST(PermutationRowError, Examples) {
  const auto id = BlockPermutation::identity(10, 2);
  EXPECT_EQ(permutation_row_error(id, id), 0.0);
  const auto swapped = BlockPermutation::from_assignment({1, 0, 2, 3, 4, 5, 6, 7, 8, 9}, 2);
  EXPECT_DOUBLE_EQ(permutation_row_error(swapped, id), 0.2);
}

TEST(PermutationRowError, CountsMismatchedRows) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = sample_s_local_permutation(30, 5, seed);
    const auto b = sample_s_local_permutation(30, 5, seed + 100);
    int wrong = 0;
    for (Index j = 0; j < 30; ++j) wrong += a.assignment()[j] != b.assignment()[j];
    EXPECT_DOUBLE_EQ(permutation_row_error(a, b), wrong / 30.0);
  }
}

TEST(Recovered, Threshold) {
  EXPECT_TRUE(recovered(1e-10));
  EXPECT_FALSE(recovered(1.0000001e-10));
  EXPECT_FALSE(recovered(std::numeric_limits<double>::quiet_NaN()));
}
