#include "safecbf/observer.hpp"

#include <cmath>
#include <stdexcept>

namespace safecbf {

bool ObserverGains::gain_condition_ok() const {
  if (!(alpha > 1.0) || !(gamma > 0.0) || !(beta > 0.0)) return false;
  return beta > delta2 + delta3 / std::max(1.0, alpha - gamma);
}

void ObserverGains::validate() const {
  if (!(alpha > 1.0)) throw std::invalid_argument("ObserverGains: alpha must exceed 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("ObserverGains: gamma must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("ObserverGains: beta must be positive");
  if (delta1 < 0.0 || delta2 < 0.0 || delta3 < 0.0)
    throw std::invalid_argument("ObserverGains: delta bounds must be nonnegative");
  if (!gain_condition_ok())
    throw std::invalid_argument(
        "ObserverGains: beta <= delta2 + delta3 / max(1, alpha - gamma)");
}

ObserverState ObserverState::initial(const Vec& x_bar0) {
  ObserverState s;
  s.x_hat = x_bar0;
  s.z_aux = Vec::Zero(x_bar0.size());
  return s;
}

Vec ObserverState::d_hat(const Vec& x_bar, const ObserverGains& g) const {
  return g.gamma * (x_bar - x_hat) + z_aux;
}

Vec sign_vec(const Vec& x, double eps) {
  Vec s(x.size());
  if (eps > 0.0) {
    for (int i = 0; i < x.size(); ++i) s[i] = std::tanh(x[i] / eps);
  } else {
    for (int i = 0; i < x.size(); ++i) s[i] = (x[i] > 0.0) ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
  }
  return s;
}

ObserverRates observer_rhs(const ObserverState& obs, const Vec& x_bar,
                           const Vec& model_rate, const ObserverGains& g) {
  if (obs.x_hat.size() != x_bar.size() || model_rate.size() != x_bar.size())
    throw std::invalid_argument("observer_rhs: dimension mismatch");
  const Vec x_tilde = x_bar - obs.x_hat;
  ObserverRates r;
  r.x_hat_dot = model_rate + obs.d_hat(x_bar, g) + g.alpha * x_tilde;
  r.z_aux_dot = (g.gamma * g.alpha + 1.0) * x_tilde + g.beta * sign_vec(x_tilde, g.sign_eps);
  return r;
}

double error_bound(double t, const ObserverGains& g) {
  return g.delta1 * std::exp(-0.5 * g.lambda_v() * std::max(0.0, t));
}

double diagnostics_rhs(const ObserverDiagnostics& diag, const Vec& x_tilde,
                       const Vec& d_tilde, const Vec& d_dot_true,
                       const ObserverGains& g) {
  const double kappa = g.lambda_v();
  const double L =
      d_tilde.dot(-g.beta * sign_vec(x_tilde, g.sign_eps) + d_dot_true);
  return -kappa * diag.P - L;
}

double lyapunov_value(const Vec& x_tilde, const Vec& d_tilde, double P) {
  return 0.5 * x_tilde.squaredNorm() + 0.5 * d_tilde.squaredNorm() + P;
}

}  // namespace safecbf
