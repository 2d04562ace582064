#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safecbf/barriers.hpp"
#include "safecbf/qp.hpp"

namespace safecbf {

enum class FilterMethod { Nominal, WorstCaseRobust, DobCbf, VcbfNoDob, DobVcbf };

const char* to_string(FilterMethod m);
std::optional<FilterMethod> filter_method_from_string(const std::string& s);
bool uses_vcbf(FilterMethod m);
bool uses_observer(FilterMethod m);

struct FilterConfig {
  FilterMethod method = FilterMethod::DobCbf;
  double lambda_vv = 3.0;      // VCBF class-K slope, 1/s
  double xi = 1e-4;            // VCBF volume floor
  double slack_penalty = 1e4;  // M
  double beta2 = 0.0;          // Theorem-2 parameter; 0 = auto at t = 0
  double fd_step = 1e-4;       // V_v finite-difference relative step
  double mvie_tol = 1e-8;

  void validate() const;
};

struct FilterOutput {
  Vec u;
  double slack = 0.0;
  QpStatus qp_status = QpStatus::Optimal;
  std::optional<double> vcbf_value;      // filled in the VCBF modes
  std::vector<int> active_rows;
  bool vcbf_degraded = false;            // MVIE failed; VCBF row dropped this step
  std::vector<int> one_sided_fd;         // coordinates where FD fell back to one-sided
};

/// Least-violation input used once the feasible space is empty: minimizes the
/// summed squared barrier-row violations over the input box, with a small
/// tie-break toward u_ref. Throws std::logic_error on a nonempty space.
Vec fallback_input(const FeasibleSpace& space, const Vec& u_ref, const Vec& u_min,
                   const Vec& u_max);

/// One QP safety filter bound to a scenario. Holds the MVIE warm start, so an
/// instance belongs to exactly one simulation run.
class SafetyFilter {
public:
  SafetyFilter(FilterConfig cfg, Plant plant, std::vector<BarrierSpec> barriers,
               Vec u_min, Vec u_max, ObserverGains gains);

  FilterOutput step(const Vec& x_bar, const Vec& u_ref, const Vec& d_hat_ext, double t);

  /// Central-difference gradient of V_v over the extended state; perturbed
  /// solves are warm-started from the base ellipsoid. One-sided fallback per
  /// coordinate on MVIE failure, reported through `one_sided`.
  Vec vcbf_gradient(const Vec& x_bar, const Vec& d_hat_ext, double t,
                    const Ellipsoid& base, std::vector<int>* one_sided) const;

  /// V_v at a state (assembles the method's polytope, solves the MVIE);
  /// returns -xi for degenerate/empty polytopes.
  double vcbf_at(const Vec& x_bar, const Vec& d_hat_ext, double t,
                 Ellipsoid* ellipsoid_out = nullptr) const;

  MarginMode margin_mode() const;
  const FilterConfig& config() const { return cfg_; }

private:
  FilterConfig cfg_;
  Plant plant_;
  std::vector<BarrierSpec> barriers_;
  Vec u_min_, u_max_;
  ObserverGains gains_;
  mutable std::optional<Ellipsoid> warm_;
};

}  // namespace safecbf
