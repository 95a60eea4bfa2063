#pragma once

// Data model for locally permuted low-rank column-wise sensing:
//
//   y_k = P* A_k x*_k,   k = 0 .. q-1,   X* = U* B*  (rank r)
//
// where P* is block-diagonal with m/s permutation blocks of size s.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "permlrcs/error.hpp"
#include "permlrcs/rng.hpp"

namespace permlrcs {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims {
  Index n = 0;  // signal dimension (rows of X*)
  Index q = 0;  // number of columns
  Index m = 0;  // measurements per column
  Index r = 0;  // rank
  Index s = 0;  // permutation block size

  Index blocks() const noexcept { return s > 0 ? m / s : 0; }

  void validate() const {
    if (n <= 0 || q <= 0 || m <= 0 || r <= 0 || s <= 0)
      throw InvalidDims("dims must be strictly positive (n=" + std::to_string(n) +
                        ", q=" + std::to_string(q) + ", m=" + std::to_string(m) +
                        ", r=" + std::to_string(r) + ", s=" + std::to_string(s) + ")");
    if (r > std::min(n, q))
      throw InvalidDims("rank r=" + std::to_string(r) + " exceeds min(n, q)=" +
                        std::to_string(std::min(n, q)));
    if (m % s != 0)
      throw InvalidDims("block size s=" + std::to_string(s) +
                        " must divide m=" + std::to_string(m));
    if (m / s < r)
      throw InvalidDims("m/s=" + std::to_string(m / s) + " must be >= r=" +
                        std::to_string(r));
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

enum class Direction { kForward, kInverse };

// s-local permutation of [0, m), stored as an index vector. Output row j of
// P*v is source row source(j) of v. Each contiguous block of s indices is
// mapped onto itself.
class BlockPermutation {
 public:
  BlockPermutation() = default;

  static BlockPermutation identity(Index m, Index s) {
    check_sizes(m, s);
    std::vector<Index> a(static_cast<std::size_t>(m));
    std::iota(a.begin(), a.end(), Index{0});
    return BlockPermutation(std::move(a), s);
  }

  // Validates block locality and bijectivity.
  static BlockPermutation from_assignment(std::vector<Index> assignment, Index s) {
    const auto m = static_cast<Index>(assignment.size());
    check_sizes(m, s);
    std::vector<char> seen(assignment.size(), 0);
    for (Index j = 0; j < m; ++j) {
      const Index src = assignment[static_cast<std::size_t>(j)];
      if (src < 0 || src >= m || src / s != j / s)
        throw InvalidDims("assignment entry " + std::to_string(j) + " -> " +
                          std::to_string(src) + " leaves its block");
      if (seen[static_cast<std::size_t>(src)]++)
        throw InvalidDims("assignment is not a bijection (source " + std::to_string(src) +
                          " repeated)");
    }
    return BlockPermutation(std::move(assignment), s);
  }

  Index size() const noexcept { return static_cast<Index>(assignment_.size()); }
  Index block_size() const noexcept { return block_size_; }
  Index blocks() const noexcept { return block_size_ > 0 ? size() / block_size_ : 0; }
  Index source(Index j) const { return assignment_[static_cast<std::size_t>(j)]; }
  std::span<const Index> assignment() const noexcept { return assignment_; }

  bool is_identity() const noexcept {
    for (std::size_t j = 0; j < assignment_.size(); ++j)
      if (assignment_[j] != static_cast<Index>(j)) return false;
    return true;
  }

  // Row-wise application; vectors are m x 1 matrices.
  template <typename Derived>
  Matrix apply(const Eigen::MatrixBase<Derived>& v, Direction dir = Direction::kForward) const {
    if (v.rows() != size())
      throw DimensionError("permutation of size " + std::to_string(size()) +
                           " applied to " + std::to_string(v.rows()) + " rows");
    Matrix out(v.rows(), v.cols());
    if (dir == Direction::kForward) {
      for (Index j = 0; j < size(); ++j) out.row(j) = v.row(source(j));
    } else {
      for (Index j = 0; j < size(); ++j) out.row(source(j)) = v.row(j);
    }
    return out;
  }

  // Dense m x m matrix with P(j, source(j)) = 1. Test helper only.
  Matrix dense() const {
    Matrix p = Matrix::Zero(size(), size());
    for (Index j = 0; j < size(); ++j) p(j, source(j)) = 1.0;
    return p;
  }

  friend bool operator==(const BlockPermutation&, const BlockPermutation&) = default;

 private:
  BlockPermutation(std::vector<Index> a, Index s) : block_size_(s), assignment_(std::move(a)) {}

  static void check_sizes(Index m, Index s) {
    if (s < 1 || m < 1) throw InvalidDims("permutation needs m >= 1 and s >= 1");
    if (m % s != 0)
      throw InvalidDims("block size s=" + std::to_string(s) +
                        " must divide m=" + std::to_string(m));
  }

  Index block_size_ = 0;
  std::vector<Index> assignment_;
};

// Uniform draw from the s-local permutations of [0, m): each block gets an
// independent Fisher-Yates shuffle.
inline BlockPermutation sample_s_local_permutation(Index m, Index s, std::uint64_t seed) {
  auto p = BlockPermutation::identity(m, s);  // validates m, s
  std::vector<Index> a(p.assignment().begin(), p.assignment().end());
  Rng rng(seed);
  for (Index b = 0; b < m / s; ++b) {
    auto* block = a.data() + b * s;
    for (Index i = s - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i);
      std::swap(block[i], block[pick(rng)]);
    }
  }
  return BlockPermutation::from_assignment(std::move(a), s);
}

struct ProblemInstance {
  Dims dims;
  Matrix Y;               // m x q observations
  std::vector<Matrix> A;  // q sensing matrices, each m x n

  void validate() const {
    dims.validate();
    if (Y.rows() != dims.m || Y.cols() != dims.q)
      throw DimensionError("Y must be m x q");
    if (static_cast<Index>(A.size()) != dims.q)
      throw DimensionError("expected q=" + std::to_string(dims.q) + " sensing matrices, got " +
                           std::to_string(A.size()));
    for (std::size_t k = 0; k < A.size(); ++k)
      if (A[k].rows() != dims.m || A[k].cols() != dims.n)
        throw DimensionError("A_" + std::to_string(k) + " must be m x n");
  }
};

struct GroundTruth {
  Matrix Ustar;  // n x r, orthonormal columns
  Matrix Bstar;  // r x q
  BlockPermutation Pstar;
  double sigma_max = 0.0;

  Matrix X() const { return Ustar * Bstar; }
};

// Block row sums: row i is the sum of rows i*s .. i*s+s-1.
struct CollapsedSystem {
  Index block_size = 1;
  Matrix Y;               // (m/s) x q
  std::vector<Matrix> A;  // q matrices, each (m/s) x n

  Index rows() const noexcept { return Y.rows(); }
};

template <typename Derived>
Matrix collapse_rows(const Eigen::MatrixBase<Derived>& v, Index s) {
  if (s < 1 || v.rows() % s != 0)
    throw InvalidDims("collapse needs s | rows (rows=" + std::to_string(v.rows()) +
                      ", s=" + std::to_string(s) + ")");
  const Index blocks = v.rows() / s;
  Matrix out = Matrix::Zero(blocks, v.cols());
  for (Index i = 0; i < blocks; ++i)
    for (Index j = 0; j < s; ++j) out.row(i) += v.row(i * s + j);
  return out;
}

inline CollapsedSystem collapse(const ProblemInstance& inst) {
  inst.validate();
  CollapsedSystem c;
  c.block_size = inst.dims.s;
  c.Y = collapse_rows(inst.Y, inst.dims.s);
  c.A.reserve(inst.A.size());
  for (const auto& a : inst.A) c.A.push_back(collapse_rows(a, inst.dims.s));
  return c;
}

struct Seeds {
  std::uint64_t instance = 0;     // drives U*, B*, {A_k}
  std::uint64_t permutation = 0;  // drives P* only

  // One master seed split into both halves.
  static Seeds from_master(std::uint64_t master) {
    return {derive_seed(master, {0}), derive_seed(master, {1})};
  }
};

struct SyntheticProblem {
  ProblemInstance instance;
  GroundTruth truth;
  Seeds seeds;
};

namespace detail {

inline Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = nd(rng);
  return g;
}

// Thin Q with R's diagonal made nonnegative.
inline Matrix orthonormal_basis(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

inline double sigma_max(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace detail

// Gaussian U* (orthonormalized), B*, A_k; P* uniform s-local. U*, B* and the
// sensing matrices depend only on seeds.instance, P* only on seeds.permutation.
inline SyntheticProblem generate_synthetic(const Dims& dims, const Seeds& seeds) {
  dims.validate();
  SyntheticProblem out;
  out.seeds = seeds;

  Rng u_rng(derive_seed(seeds.instance, {stream::kUstar}));
  out.truth.Ustar = detail::orthonormal_basis(detail::gaussian(dims.n, dims.r, u_rng));

  Rng b_rng(derive_seed(seeds.instance, {stream::kBstar}));
  out.truth.Bstar = detail::gaussian(dims.r, dims.q, b_rng);

  Rng a_rng(derive_seed(seeds.instance, {stream::kSensing}));
  out.instance.A.reserve(static_cast<std::size_t>(dims.q));
  for (Index k = 0; k < dims.q; ++k) out.instance.A.push_back(detail::gaussian(dims.m, dims.n, a_rng));

  out.truth.Pstar = sample_s_local_permutation(
      dims.m, dims.s, derive_seed(seeds.permutation, {stream::kPermutation}));

  const Matrix X = out.truth.X();
  out.truth.sigma_max = detail::sigma_max(X);

  out.instance.dims = dims;
  out.instance.Y.resize(dims.m, dims.q);
  for (Index k = 0; k < dims.q; ++k)
    out.instance.Y.col(k) = out.truth.Pstar.apply(out.instance.A[k] * X.col(k));
  return out;
}

inline SyntheticProblem generate_synthetic(const Dims& dims, std::uint64_t seed) {
  return generate_synthetic(dims, Seeds::from_master(seed));
}

// sum_k || y_k - P A_k U b_k ||^2
inline double objective(const BlockPermutation& P, const Matrix& U, const Matrix& B,
                        const ProblemInstance& inst) {
  const auto& d = inst.dims;
  if (P.size() != d.m || U.rows() != d.n || B.cols() != d.q || U.cols() != B.rows() ||
      static_cast<Index>(inst.A.size()) != d.q || inst.Y.rows() != d.m || inst.Y.cols() != d.q)
    throw DimensionError("objective: inconsistent shapes");
  const Matrix unpermuted = P.apply(inst.Y, Direction::kInverse);
  double f = 0.0;
  for (Index k = 0; k < d.q; ++k)
    f += (unpermuted.col(k) - inst.A[k] * (U * B.col(k))).squaredNorm();
  return f;
}

// max_k ||x*_k|| / (sigma_max sqrt(r/q)). Diagnostic only.
inline double compute_incoherence(const Matrix& Ustar, const Matrix& Bstar) {
  if (Ustar.cols() != Bstar.rows()) throw DimensionError("incoherence: U*, B* shapes disagree");
  const Matrix X = Ustar * Bstar;
  const double smax = detail::sigma_max(X);
  if (!(smax > 0.0)) throw DegenerateError("incoherence undefined for X* = 0");
  const double r = static_cast<double>(Ustar.cols());
  const double q = static_cast<double>(Bstar.cols());
  return X.colwise().norm().maxCoeff() / (smax * std::sqrt(r / q));
}

}  // namespace permlrcs
