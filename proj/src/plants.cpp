#include "safecbf/plants.hpp"

#include <cmath>
#include <stdexcept>

namespace safecbf {

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Vec blimp_rhs(const BlimpParams& pr, const Vec& s, const Vec& u, const Vec& d) {
  if (s.size() != 7 || u.size() != 3 || d.size() != 3)
    throw std::invalid_argument("blimp_rhs: dimension mismatch");
  const double psi = s[3];
  const double vx = s[4], vy = s[5], vz = s[6];
  const double fx = u[0], fz = u[1], tau = u[2];
  Vec ds(7);
  ds[0] = vx;
  ds[1] = vy;
  ds[2] = vz;
  ds[3] = tau / pr.inertia;
  ds[4] = (fx * std::cos(psi) - pr.drag * vx) / pr.mass + d[0];
  ds[5] = (fx * std::sin(psi) - pr.drag * vy) / pr.mass + d[1];
  ds[6] = (fz - pr.drag * vz) / pr.mass + d[2];
  return ds;
}

Vec blimp_reference(const BlimpParams& pr, const BlimpRefGains& g, const Vec& s,
                    const Vec& target, const Vec& d_hat) {
  if (s.size() != 7 || target.size() != 3 || d_hat.size() != 3)
    throw std::invalid_argument("blimp_reference: dimension mismatch");
  const double x = s[0], y = s[1], z = s[2], psi = s[3];
  const double vx = s[4], vy = s[5], vz = s[6];
  const double v = std::hypot(vx, vy);
  const double e_d = std::hypot(target[0] - x, target[1] - y);
  const double bearing = (e_d > 1e-12) ? std::atan2(target[1] - y, target[0] - x) : psi;
  const double e_psi = wrap_angle(psi - bearing);
  const double e_z = z - target[2];

  double fx = -g.k_v * (v - g.k_x * e_d * std::cos(e_psi));
  double fz = -g.k_w * (vz + g.k_z * e_z);
  const double tau = -g.k_psi * e_psi;

  // feedforward cancellation on the actuated channels
  fx -= pr.mass * (d_hat[0] * std::cos(psi) + d_hat[1] * std::sin(psi));
  fz -= pr.mass * d_hat[2];

  Vec u(3);
  u << fx, fz, tau;
  return u;
}

Vec ackermann_rhs(const AckermannParams& pr, const Vec& s, const Vec& u, double d) {
  if (s.size() != 4 || u.size() != 2)
    throw std::invalid_argument("ackermann_rhs: dimension mismatch");
  const double v = s[2], psi = s[3];
  Vec ds(4);
  ds[0] = v * std::cos(psi);
  ds[1] = v * std::sin(psi);
  ds[2] = (u[0] + d) / pr.mass;
  ds[3] = u[1];
  return ds;
}

Vec ackermann_reference(const AckermannParams& pr, const AckermannRefGains& g,
                        const Vec& s, const Vec& target, double d_hat_v) {
  if (s.size() != 4 || target.size() != 2)
    throw std::invalid_argument("ackermann_reference: dimension mismatch");
  const double x = s[0], y = s[1], v = s[2], psi = s[3];
  const double e_d = std::hypot(target[0] - x, target[1] - y);
  const double psi_r = (e_d > 1e-12) ? std::atan2(target[1] - y, target[0] - x) : psi;
  const double e_psi = wrap_angle(psi - psi_r);
  const double omega = -g.k_omega * e_psi;
  const double v_r = g.k_p * e_d * std::cos(e_psi);
  double a = -g.k_v * (v - v_r);
  a -= pr.mass * d_hat_v;
  Vec u(2);
  u << a, omega;
  return u;
}

Vec DisturbanceSpec::eval(double t) const {
  if (kind == Kind::Constant) return amplitude;
  Vec d(amplitude.size());
  for (int i = 0; i < amplitude.size(); ++i)
    d[i] = amplitude[i] * std::sin(frequency * t + (phase.size() > i ? phase[i] : 0.0));
  return d;
}

Vec DisturbanceSpec::eval_derivative(double t) const {
  if (kind == Kind::Constant) return Vec::Zero(amplitude.size());
  Vec d(amplitude.size());
  for (int i = 0; i < amplitude.size(); ++i)
    d[i] = amplitude[i] * frequency *
           std::cos(frequency * t + (phase.size() > i ? phase[i] : 0.0));
  return d;
}

bool DisturbanceSpec::bounds_consistent() const {
  const double amp = amplitude.norm();
  if (kind == Kind::Constant) return amp <= delta1 + 1e-12;
  const double w = std::abs(frequency);
  return amp <= delta1 + 1e-12 && amp * w <= delta2 + 1e-12 &&
         amp * w * w <= delta3 + 1e-12;
}

void DisturbanceSpec::validate() const {
  if (amplitude.size() < 1)
    throw std::invalid_argument("DisturbanceSpec: amplitude missing");
  if (!bounds_consistent())
    throw std::invalid_argument(
        "DisturbanceSpec: declared (delta1, delta2, delta3) do not cover the signal");
}

Vec Plant::f_bar(const Vec& x_bar) const {
  const int n = state_dim();
  if (x_bar.size() != n + 1) throw std::invalid_argument("f_bar: dimension mismatch");
  Vec f(n + 1);
  if (kind == PlantKind::Blimp) {
    const double vx = x_bar[4], vy = x_bar[5], vz = x_bar[6];
    f[0] = vx;
    f[1] = vy;
    f[2] = vz;
    f[3] = 0.0;
    f[4] = -blimp.drag * vx / blimp.mass;
    f[5] = -blimp.drag * vy / blimp.mass;
    f[6] = -blimp.drag * vz / blimp.mass;
  } else {
    const double v = x_bar[2], psi = x_bar[3];
    f[0] = v * std::cos(psi);
    f[1] = v * std::sin(psi);
    f[2] = 0.0;
    f[3] = 0.0;
  }
  f[n] = 1.0;  // time
  return f;
}

Mat Plant::g_bar(const Vec& x_bar) const {
  const int n = state_dim();
  if (x_bar.size() != n + 1) throw std::invalid_argument("g_bar: dimension mismatch");
  Mat g = Mat::Zero(n + 1, input_dim());
  if (kind == PlantKind::Blimp) {
    const double psi = x_bar[3];
    g(3, 2) = 1.0 / blimp.inertia;
    g(4, 0) = std::cos(psi) / blimp.mass;
    g(5, 0) = std::sin(psi) / blimp.mass;
    g(6, 1) = 1.0 / blimp.mass;
  } else {
    g(2, 0) = 1.0 / ackermann.mass;
    g(3, 1) = 1.0;
  }
  return g;
}

Vec Plant::nominal_rate(const Vec& x_bar, const Vec& u) const {
  return f_bar(x_bar) + g_bar(x_bar) * u;
}

void Plant::rate_into(const Vec& x_bar, const Vec& u, Vec& out) const {
  if (kind == PlantKind::Blimp) {
    const double psi = x_bar[3];
    const double vx = x_bar[4], vy = x_bar[5], vz = x_bar[6];
    out[0] = vx;
    out[1] = vy;
    out[2] = vz;
    out[3] = u[2] / blimp.inertia;
    out[4] = (u[0] * std::cos(psi) - blimp.drag * vx) / blimp.mass;
    out[5] = (u[0] * std::sin(psi) - blimp.drag * vy) / blimp.mass;
    out[6] = (u[1] - blimp.drag * vz) / blimp.mass;
    out[7] = 1.0;
  } else {
    const double v = x_bar[2], psi = x_bar[3];
    out[0] = v * std::cos(psi);
    out[1] = v * std::sin(psi);
    out[2] = u[0] / ackermann.mass;
    out[3] = u[1];
    out[4] = 1.0;
  }
}

Vec Plant::dist_to_extended(const Vec& d_phys) const {
  const int n = state_dim();
  Vec d = Vec::Zero(n + 1);
  if (kind == PlantKind::Blimp) {
    if (d_phys.size() != 3) throw std::invalid_argument("dist_to_extended: need 3 channels");
    d.segment(4, 3) = d_phys;
  } else {
    if (d_phys.size() != 1) throw std::invalid_argument("dist_to_extended: need 1 channel");
    d[2] = d_phys[0] / ackermann.mass;
  }
  return d;
}

Vec Plant::reference(const Vec& x_bar, const Vec& target, const Vec& d_hat_ext) const {
  const int n = state_dim();
  if (d_hat_ext.size() != n + 1)
    throw std::invalid_argument("reference: d_hat must be extended-state sized");
  if (kind == PlantKind::Blimp) {
    return blimp_reference(blimp, blimp_gains, x_bar.head(7), target,
                           d_hat_ext.segment(4, 3));
  }
  return ackermann_reference(ackermann, ackermann_gains, x_bar.head(4), target,
                             d_hat_ext[2] /* already acceleration-scaled */);
}

Vec Plant::extend(const Vec& x_phys, double t) const {
  if (x_phys.size() != state_dim())
    throw std::invalid_argument("extend: physical state size mismatch");
  Vec x(state_dim() + 1);
  x.head(state_dim()) = x_phys;
  x[state_dim()] = t;
  return x;
}

}  // namespace safecbf
