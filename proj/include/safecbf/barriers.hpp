#pragma once

#include <vector>

#include "safecbf/geometry.hpp"
#include "safecbf/numerics.hpp"
#include "safecbf/observer.hpp"
#include "safecbf/plants.hpp"

namespace safecbf {

enum class BarrierKind {
  SphereSignedDistance,  // h = ||p - center|| - radius, 3-D position
  SquaredDistance2D,     // h = ||p - center||^2 - min_dist^2, planar position
};

struct BarrierSpec {
  BarrierKind kind = BarrierKind::SphereSignedDistance;
  Vec center;            // 3 (sphere) or 2 (planar)
  double radius = 0.0;   // sphere radius / planar min distance
  PoleSet poles;         // ascending; length = relative degree

  int rel_degree() const { return poles.order(); }
  void validate() const;
};

/// Evaluated HOCBF chain at one extended state.
struct ChainEval {
  double h = 0.0;
  Vec phi;     // phi^0 .. phi^{r-1}
  Vec eta;     // [L_f^{r-1} h, ..., h]
  double lfr_h = 0.0;  // L_f^r h
  Vec lg_row;  // L_g L_f^{r-1} h, one entry per input
  Vec li_row;  // gradient of L_f^{r-1} h over the extended state
};

/// Analytic chain evaluation; the chain applies poles in descending order so
/// the last stage carries the smallest pole. Throws SingularBarrier inside a
/// sphere's 1e-6 core.
ChainEval eval_chain(const BarrierSpec& spec, const Vec& x_bar, const Plant& plant);

/// Time-varying DOB margin  Lambda = li . d_hat - ||li|| delta1 e^{-lambda_V t/2}.
double dob_margin(const ChainEval& chain, const Vec& d_hat_ext,
                  const ObserverGains& g, double t);

enum class MarginMode { Nominal, WorstCaseRobust, Dob };

/// Stacked feasible input space: box rows first, one HOCBF row per barrier.
/// Margins live beside the base offsets; effective() applies them.
struct FeasibleSpace {
  Polytope polytope;  // A u <= b, margins excluded
  Vec margins;        // Delta b, zero on the box rows
  int box_rows = 0;

  Polytope effective() const {
    Polytope p = polytope;
    p.b += margins;
    return p;
  }
};

FeasibleSpace assemble_feasible_space(const std::vector<BarrierSpec>& barriers,
                                      const Plant& plant, const Vec& u_min,
                                      const Vec& u_max, const Vec& x_bar,
                                      const Vec& d_hat_ext, const ObserverGains& g,
                                      double t, MarginMode mode);

/// Candidate certificate  h_bar = beta1 * phi^{r-1} - V.
double certificate_hbar(const ChainEval& chain, const ObserverDiagnostics& diag,
                        double beta1);

}  // namespace safecbf
