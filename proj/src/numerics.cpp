#include "safecbf/numerics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safecbf/errors.hpp"

namespace safecbf {

void PoleSet::validate() const {
  if (poles.size() < 1) throw std::invalid_argument("PoleSet: need at least one pole");
  for (int i = 0; i < poles.size(); ++i) {
    if (!(poles[i] > 0.0))
      throw std::invalid_argument("PoleSet: poles must be strictly positive");
  }
  for (int i = 1; i < poles.size(); ++i) {
    if (poles[i] < poles[i - 1])
      throw std::invalid_argument("PoleSet: poles must be ascending");
  }
}

namespace {

void check_finite(const Vec& k, const char* stage) {
  for (int i = 0; i < k.size(); ++i) {
    if (!std::isfinite(k[i])) {
      std::ostringstream os;
      os << "non-finite derivative in component " << i << " at RK4 stage " << stage;
      throw IntegrationFault(i, os.str());
    }
  }
}

}  // namespace

Vec rk4_step(const OdeRhs& f, const Vec& x, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  Vec k1 = f(x);
  check_finite(k1, "k1");
  Vec k2 = f(x + 0.5 * dt * k1);
  check_finite(k2, "k2");
  Vec k3 = f(x + 0.5 * dt * k2);
  check_finite(k3, "k3");
  Vec k4 = f(x + dt * k3);
  check_finite(k4, "k4");
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void rk4_step_inplace(const std::function<void(const Vec&, Vec&)>& f, const Vec& x,
                      double dt, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp, Vec& out) {
  f(x, k1);
  check_finite(k1, "k1");
  tmp = x + (0.5 * dt) * k1;
  f(tmp, k2);
  check_finite(k2, "k2");
  tmp = x + (0.5 * dt) * k2;
  f(tmp, k3);
  check_finite(k3, "k3");
  tmp = x + dt * k3;
  f(tmp, k4);
  check_finite(k4, "k4");
  out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec poles_to_gains(const PoleSet& ps) {
  ps.validate();
  const int r = ps.order();
  // coeffs of prod (lambda + lambda_i), highest degree first, starts as {1}
  Vec coeffs = Vec::Zero(r + 1);
  coeffs[0] = 1.0;
  int degree = 0;
  for (int i = 0; i < r; ++i) {
    const double li = ps.poles[i];
    for (int j = degree + 1; j >= 1; --j) coeffs[j] += li * coeffs[j - 1];
    ++degree;
  }
  return coeffs.tail(r);
}

Vec fd_gradient(const ScalarFn& f, const Vec& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Vec g(x.size());
  Vec probe = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      std::ostringstream os;
      os << "non-finite evaluation while differencing coordinate " << i;
      throw GradientFault(i, os.str());
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace safecbf
