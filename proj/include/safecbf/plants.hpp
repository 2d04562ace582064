#pragma once

#include "safecbf/numerics.hpp"

namespace safecbf {

// ---------------------------------------------------------------------------
// Blimp: state [x, y, z, psi, vx, vy, vz], inputs [f_x, f_z, tau_psi],
// force disturbances on the three translational accelerations.
// ---------------------------------------------------------------------------

struct BlimpParams {
  double mass = 1.0;     // kg
  double inertia = 1.0;  // kg m^2, yaw
  double drag = 0.5;     // N s/m, linear translational drag
};

struct BlimpRefGains {
  double k_v = 4.0;
  double k_x = 1.0;
  double k_w = 4.0;
  double k_z = 1.0;
  double k_psi = 3.0;
};

Vec blimp_rhs(const BlimpParams& pr, const Vec& s, const Vec& u, const Vec& d);
Vec blimp_reference(const BlimpParams& pr, const BlimpRefGains& g, const Vec& s,
                    const Vec& target, const Vec& d_hat);

// ---------------------------------------------------------------------------
// Ackermann steering robot: state [x, y, v, psi], inputs [a, omega],
// scalar force disturbance on the longitudinal acceleration.
// ---------------------------------------------------------------------------

struct AckermannParams {
  double mass = 1.0;  // kg
};

struct AckermannRefGains {
  double k_omega = 2.0;
  double k_p = 0.6;
  double k_v = 3.0;
};

Vec ackermann_rhs(const AckermannParams& pr, const Vec& s, const Vec& u, double d);
Vec ackermann_reference(const AckermannParams& pr, const AckermannRefGains& g,
                        const Vec& s, const Vec& target, double d_hat_v);

// ---------------------------------------------------------------------------
// Disturbance generators with declared Assumption-style bounds.
// ---------------------------------------------------------------------------

struct DisturbanceSpec {
  enum class Kind { Constant, Sinusoid };
  Kind kind = Kind::Constant;
  Vec amplitude;           // one entry per physical channel
  double frequency = 0.0;  // rad/s, sinusoid only
  Vec phase;               // rad, per channel
  double delta1 = 0.0;     // ||d|| bound
  double delta2 = 0.0;     // ||d_dot|| bound
  double delta3 = 0.0;     // ||d_ddot|| bound

  Vec eval(double t) const;
  Vec eval_derivative(double t) const;
  /// Analytic check ||amp|| * max(1, w, w^2) against (delta1, delta2, delta3).
  bool bounds_consistent() const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Uniform plant facade over the extended state x_bar = [x; t].
// ---------------------------------------------------------------------------

enum class PlantKind { Blimp, Ackermann };

struct Plant {
  PlantKind kind = PlantKind::Blimp;
  BlimpParams blimp;
  BlimpRefGains blimp_gains;
  AckermannParams ackermann;
  AckermannRefGains ackermann_gains;

  int state_dim() const { return kind == PlantKind::Blimp ? 7 : 4; }
  int input_dim() const { return kind == PlantKind::Blimp ? 3 : 2; }
  int dist_dim() const { return kind == PlantKind::Blimp ? 3 : 1; }
  int ext_dim() const { return state_dim() + 1; }

  Vec f_bar(const Vec& x_bar) const;
  Mat g_bar(const Vec& x_bar) const;
  Vec nominal_rate(const Vec& x_bar, const Vec& u) const;  // f_bar + g_bar u
  /// f_bar + g_bar u written straight into `out`; no temporaries.
  void rate_into(const Vec& x_bar, const Vec& u, Vec& out) const;

  /// Lift the physical disturbance channels into the extended state.
  Vec dist_to_extended(const Vec& d_phys) const;

  /// Reference feedback law; d_hat_ext is the extended-state disturbance
  /// estimate (pass zeros for observer-free methods).
  Vec reference(const Vec& x_bar, const Vec& target, const Vec& d_hat_ext) const;

  Vec extend(const Vec& x_phys, double t) const;
};

double wrap_angle(double a);  // to (-pi, pi]

}  // namespace safecbf
