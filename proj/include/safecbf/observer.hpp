#pragma once

#include "safecbf/numerics.hpp"

namespace safecbf {

/// RISE observer gains with the disturbance magnitude/rate/acceleration
/// bounds they must dominate.
struct ObserverGains {
  double alpha = 5.0;   // 1/s
  double beta = 6.0;    // 1/s
  double gamma = 4.0;   // 1/s
  double delta1 = 0.3;  // ||d||
  double delta2 = 0.3;  // ||d_dot||
  double delta3 = 0.3;  // ||d_ddot||
  double sign_eps = 0.0;  // 0 = exact sign; >0 smooths with tanh(x/eps)

  double lambda_v() const { return std::min(alpha - 1.0, gamma); }
  bool gain_condition_ok() const;
  void validate() const;  // throws std::invalid_argument
};

/// Observer integrator state. The estimate d_hat = gamma * x_tilde + z_aux
/// is derived, never integrated directly, so no derivative of the measured
/// state is ever formed.
struct ObserverState {
  Vec x_hat;
  Vec z_aux;

  static ObserverState initial(const Vec& x_bar0);
  Vec d_hat(const Vec& x_bar, const ObserverGains& g) const;
};

struct ObserverRates {
  Vec x_hat_dot;
  Vec z_aux_dot;
};

/// Lyapunov bookkeeping for certificate checks (simulation-only: needs the
/// true disturbance).
struct ObserverDiagnostics {
  double P = 0.0;
  double V = 0.0;
  double kappa = 0.0;
};

Vec sign_vec(const Vec& x, double eps);

/// x_hat_dot = model_rate + d_hat + alpha x_tilde,
/// z_aux_dot = gamma alpha x_tilde + x_tilde + beta sign(x_tilde),
/// with model_rate = f_bar(x_bar) + g_bar(x_bar) u supplied by the caller.
ObserverRates observer_rhs(const ObserverState& obs, const Vec& x_bar,
                           const Vec& model_rate, const ObserverGains& g);

/// Certified estimation-error envelope delta1 * exp(-lambda_V t / 2).
double error_bound(double t, const ObserverGains& g);

/// dP/dt = -kappa P - L with L = d_tilde . (-beta sign(x_tilde) + d_dot).
double diagnostics_rhs(const ObserverDiagnostics& diag, const Vec& x_tilde,
                       const Vec& d_tilde, const Vec& d_dot_true,
                       const ObserverGains& g);

double lyapunov_value(const Vec& x_tilde, const Vec& d_tilde, double P);

}  // namespace safecbf
