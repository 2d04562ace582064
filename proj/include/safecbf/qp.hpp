#pragma once

#include "safecbf/numerics.hpp"

namespace safecbf {

enum class QpStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(QpStatus s);

/// min 1/2 z'Hz + q'z  s.t.  A z <= b, with H symmetric positive definite.
struct QpProblem {
  Mat H;
  Vec q;
  Mat A;  // may have zero rows
  Vec b;

  void validate() const;  // throws std::invalid_argument
};

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Vec z;
  Vec duals;  // one multiplier per row, zero off the active set
  double kkt_residual = std::numeric_limits<double>::infinity();
};

/// Primal active-set method. Emptiness of the constraint polytope is
/// certified with the Chebyshev LP before the loop starts.
QpSolution solve_qp(const QpProblem& p, double tol = 1e-9);

}  // namespace safecbf
