#pragma once

// Exact linear assignment for the permutation update. The block-diagonal
// structure decouples argmin_P ||Y - P Yhat||_F^2 into m/s independent s x s
// maximization problems over score matrices S(a, b) = <Y row a, Yhat row b>.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "permlrcs/core_model.hpp"

namespace permlrcs {

struct LapSolution {
  std::vector<Index> assignment;  // row a is matched to column assignment[a]
  double value = 0.0;             // sum_a M(a, assignment[a]), summed in row order
};

// sum_a M(a, sigma(a)) accumulated in row order. Used for every reported value
// so that equal assignments always produce bitwise-equal scores.
inline double assignment_score(const Matrix& M, const std::vector<Index>& sigma) {
  double v = 0.0;
  for (Index a = 0; a < M.rows(); ++a) v += M(a, sigma[static_cast<std::size_t>(a)]);
  return v;
}

namespace detail {

struct HungarianResult {
  std::vector<Index> assignment;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
};

// Shortest augmenting path Hungarian method (Kuhn-Munkres with potentials),
// minimizing sum_a cost(a, sigma(a)). O(s^3).
inline HungarianResult hungarian_min(const Matrix& cost) {
  const Index s = cost.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based; column 0 is the virtual source.
  std::vector<double> u(s + 1, 0.0), v(s + 1, 0.0), minv(s + 1);
  std::vector<Index> match(s + 1, 0), way(s + 1, 0);
  std::vector<char> used(s + 1);

  for (Index i = 1; i <= s; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= s; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= s; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianResult out;
  out.assignment.assign(static_cast<std::size_t>(s), -1);
  for (Index j = 1; j <= s; ++j) out.assignment[match[j] - 1] = j - 1;
  out.row_potential.assign(u.begin() + 1, u.end());
  out.col_potential.assign(v.begin() + 1, v.end());
  return out;
}

// Kuhn's augmenting-path check: can rows [first_row, s) be perfectly matched
// into the free columns using only allowed edges?
class TightMatcher {
 public:
  TightMatcher(const std::vector<std::vector<char>>& allowed) : allowed_(allowed) {}

  bool completable(Index first_row, const std::vector<char>& col_taken) {
    const auto s = static_cast<Index>(allowed_.size());
    owner_.assign(static_cast<std::size_t>(s), -1);
    for (Index a = first_row; a < s; ++a) {
      visited_.assign(static_cast<std::size_t>(s), 0);
      if (!augment(a, col_taken)) return false;
    }
    return true;
  }

 private:
  bool augment(Index a, const std::vector<char>& col_taken) {
    const auto s = static_cast<Index>(allowed_.size());
    for (Index b = 0; b < s; ++b) {
      if (col_taken[b] || !allowed_[a][b] || visited_[b]) continue;
      visited_[b] = 1;
      if (owner_[b] < 0 || augment(owner_[b], col_taken)) {
        owner_[b] = a;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<char>>& allowed_;
  std::vector<Index> owner_;
  std::vector<char> visited_;
};

// Lexicographically smallest perfect matching in the equality subgraph of the
// optimal duals (edges whose reduced cost is within `slack`). Returns an
// empty vector when that subgraph has no perfect matching.
inline std::vector<Index> lexicographic_tight_matching(const Matrix& cost,
                                                       const HungarianResult& h,
                                                       double slack) {
  const Index s = cost.rows();
  std::vector<std::vector<char>> tight(static_cast<std::size_t>(s),
                                       std::vector<char>(static_cast<std::size_t>(s), 0));
  for (Index a = 0; a < s; ++a)
    for (Index b = 0; b < s; ++b)
      tight[a][b] = cost(a, b) - h.row_potential[a] - h.col_potential[b] <= slack;

  TightMatcher matcher(tight);
  std::vector<char> taken(static_cast<std::size_t>(s), 0);
  std::vector<Index> sigma(static_cast<std::size_t>(s), -1);
  for (Index a = 0; a < s; ++a) {
    for (Index b = 0; b < s; ++b) {
      if (taken[b] || !tight[a][b]) continue;
      taken[b] = 1;
      if (matcher.completable(a + 1, taken)) {
        sigma[a] = b;
        break;
      }
      taken[b] = 0;
    }
    if (sigma[a] < 0) return {};
  }
  return sigma;
}

}  // namespace detail

// Exact maximizer of sum_a M(a, sigma(a)) over permutations sigma of [0, s).
// Among optimal assignments the lexicographically smallest is returned.
inline LapSolution solve_lap_max(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("score matrix must be square");
  if (!M.allFinite()) throw DegenerateError("score matrix has non-finite entries");
  const Index s = M.rows();
  if (s == 0) return {};
  if (s == 1) return {{0}, M(0, 0)};

  const Matrix cost = -M;
  const auto h = detail::hungarian_min(cost);
  LapSolution best{h.assignment, assignment_score(M, h.assignment)};

  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(s) * scale;
  auto lex = detail::lexicographic_tight_matching(cost, h, slack);
  if (!lex.empty() && lex != best.assignment) {
    const double v = assignment_score(M, lex);
    if (v >= best.value) best = {std::move(lex), v};
  }
  return best;
}

// Score matrix of block i: S(a, b) = <Y row (i*s + a), Yhat row (i*s + b)>.
inline Matrix block_scores(const Matrix& Y, const Matrix& Yhat, Index block, Index s) {
  return Y.middleRows(block * s, s) * Yhat.middleRows(block * s, s).transpose();
}

// argmin over s-local P of ||Y - P Yhat||_F^2, solved block by block.
inline BlockPermutation update_permutation(const Matrix& Y, const Matrix& Yhat, Index s) {
  if (Y.rows() != Yhat.rows() || Y.cols() != Yhat.cols())
    throw DimensionError("update_permutation: Y and Yhat shapes differ");
  if (s < 1 || Y.rows() % s != 0)
    throw InvalidDims("update_permutation: s=" + std::to_string(s) +
                      " must divide m=" + std::to_string(Y.rows()));
  const Index m = Y.rows();
  std::vector<Index> sigma(static_cast<std::size_t>(m));
  for (Index i = 0; i < m / s; ++i) {
    const auto sol = solve_lap_max(block_scores(Y, Yhat, i, s));
    for (Index a = 0; a < s; ++a) sigma[i * s + a] = i * s + sol.assignment[a];
  }
  return BlockPermutation::from_assignment(std::move(sigma), s);
}

}  // namespace permlrcs
