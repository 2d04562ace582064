#pragma once

#include <Eigen/Dense>
#include <functional>

namespace safecbf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Strictly positive chain poles, stored in ascending order.
struct PoleSet {
  Vec poles;

  PoleSet() = default;
  explicit PoleSet(Vec p) : poles(std::move(p)) {}

  int order() const { return static_cast<int>(poles.size()); }
  void validate() const;  // throws std::invalid_argument
};

using OdeRhs = std::function<Vec(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

/// One classical 4th-order Runge-Kutta step of size dt.
/// Throws IntegrationFault naming the first non-finite derivative component.
Vec rk4_step(const OdeRhs& f, const Vec& x, double dt);

/// Allocation-free variant for hot loops; k1..k4 and tmp are caller scratch
/// buffers of the state size, out may alias x.
void rk4_step_inplace(const std::function<void(const Vec&, Vec&)>& f, const Vec& x,
                      double dt, Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp, Vec& out);

/// Coefficients [k^1, ..., k^r] of prod_i (lambda + lambda_i), leading 1 dropped.
Vec poles_to_gains(const PoleSet& ps);

/// Central differences with per-coordinate step h_i = step * max(1, |x_i|).
/// Throws GradientFault naming the coordinate on a non-finite evaluation.
Vec fd_gradient(const ScalarFn& f, const Vec& x, double step = 1e-4);

}  // namespace safecbf
