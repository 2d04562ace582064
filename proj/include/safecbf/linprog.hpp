#pragma once

#include "safecbf/numerics.hpp"

namespace safecbf {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;                    // only meaningful when Optimal
  double objective = 0.0;
};

/// Dense two-phase simplex for  min c'x  s.t.  A x <= b,  x free.
/// Free variables are split internally; Bland's rule guards against cycling.
LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c);

}  // namespace safecbf
