#pragma once

#include <optional>

#include "safecbf/numerics.hpp"

namespace safecbf {

/// H-polytope { u : A u <= b }.
struct Polytope {
  Mat A;  // rows = constraints, cols = input dimension
  Vec b;

  int dim() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }
  void validate() const;
};

/// Inscribed ellipsoid { B u + c : ||u|| <= 1 } with B symmetric PD.
struct Ellipsoid {
  Mat B;
  Vec c;

  int dim() const { return static_cast<int>(B.rows()); }
  double det_b() const { return B.determinant(); }
};

struct ChebyshevBall {
  Vec center;
  double radius = 0.0;
  bool empty = false;  // radius below the feasibility tolerance
};

constexpr double kFeasibilityTol = 1e-9;

/// Largest inscribed ball via LP. Throws UnboundedFeasibleSpace when no row
/// bounds the radius; rows with zero normal and negative offset mark the
/// polytope empty.
ChebyshevBall chebyshev_center(const Polytope& p);

/// Same LP with the radius capped at `cap`; never unbounded. Used to certify
/// nonemptiness / fetch an interior point of possibly unbounded polytopes.
ChebyshevBall chebyshev_center_capped(const Polytope& p, double cap);

/// Maximum-volume inscribed ellipsoid: max det B s.t. ||B a_i|| + a_i.c <= b_i.
/// Damped-Newton interior point on the log-det barrier, B = L L^T with L
/// lower-triangular, started from the Chebyshev ball (or `warm` if given).
/// Throws InfeasibleSpace for empty/degenerate polytopes and
/// ConvergenceFailure past the iteration limit.
Ellipsoid max_inscribed_ellipsoid(const Polytope& p, double tol = 1e-8,
                                  const Ellipsoid* warm = nullptr);

/// Ellipsoid-volume proxy minus the floor xi:  pi^{m/2}/Gamma(m/2+1) det B - xi.
double vcbf_value(const Ellipsoid& e, double xi);

/// Componentwise A u <= b + slack_tol.
bool contains(const Polytope& p, const Vec& u, double slack_tol = 0.0);

}  // namespace safecbf
