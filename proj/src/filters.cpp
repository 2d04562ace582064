#include "safecbf/filters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safecbf/errors.hpp"

namespace safecbf {

const char* to_string(FilterMethod m) {
  switch (m) {
    case FilterMethod::Nominal: return "nominal";
    case FilterMethod::WorstCaseRobust: return "worst_case_robust";
    case FilterMethod::DobCbf: return "dob_cbf";
    case FilterMethod::VcbfNoDob: return "vcbf_no_dob";
    case FilterMethod::DobVcbf: return "dob_vcbf";
  }
  return "?";
}

std::optional<FilterMethod> filter_method_from_string(const std::string& s) {
  if (s == "nominal") return FilterMethod::Nominal;
  if (s == "worst_case_robust") return FilterMethod::WorstCaseRobust;
  if (s == "dob_cbf") return FilterMethod::DobCbf;
  if (s == "vcbf_no_dob") return FilterMethod::VcbfNoDob;
  if (s == "dob_vcbf") return FilterMethod::DobVcbf;
  return std::nullopt;
}

bool uses_vcbf(FilterMethod m) {
  return m == FilterMethod::VcbfNoDob || m == FilterMethod::DobVcbf;
}

bool uses_observer(FilterMethod m) {
  return m == FilterMethod::DobCbf || m == FilterMethod::DobVcbf;
}

void FilterConfig::validate() const {
  if (!(lambda_vv > 0.0)) throw std::invalid_argument("FilterConfig: lambda_vv must be positive");
  if (!(xi > 0.0)) throw std::invalid_argument("FilterConfig: xi must be positive");
  if (!(slack_penalty > 1.0)) throw std::invalid_argument("FilterConfig: M must exceed 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("FilterConfig: fd_step must be positive");
  if (!(mvie_tol > 0.0)) throw std::invalid_argument("FilterConfig: mvie_tol must be positive");
}

namespace {

std::vector<int> active_from_duals(const Vec& duals, int limit) {
  std::vector<int> active;
  for (int i = 0; i < std::min<int>(limit, static_cast<int>(duals.size())); ++i)
    if (duals[i] > 1e-9) active.push_back(i);
  return active;
}

}  // namespace

Vec fallback_input(const FeasibleSpace& space, const Vec& u_ref, const Vec& u_min,
                   const Vec& u_max) {
  const Polytope eff = space.effective();
  const int m = eff.dim();
  const double scale = 1.0 + eff.b.cwiseAbs().maxCoeff();
  const ChebyshevBall ball = chebyshev_center_capped(eff, scale);
  if (!ball.empty)
    throw std::logic_error("fallback_input: feasible space is nonempty");

  const int nb = eff.rows() - space.box_rows;
  const int nv = m + nb;
  const double eps = 1e-6;  // tie-break toward u_ref; larger values skew the LS point

  QpProblem qp;
  qp.H = Mat::Zero(nv, nv);
  qp.H.topLeftCorner(m, m) = 2.0 * eps * Mat::Identity(m, m);
  qp.H.bottomRightCorner(nb, nb) = 2.0 * Mat::Identity(nb, nb);
  qp.q = Vec::Zero(nv);
  qp.q.head(m) = -2.0 * eps * u_ref;

  qp.A = Mat::Zero(2 * m + 2 * nb, nv);
  qp.b = Vec::Zero(2 * m + 2 * nb);
  for (int j = 0; j < m; ++j) {
    qp.A(j, j) = 1.0;
    qp.b[j] = u_max[j];
    qp.A(m + j, j) = -1.0;
    qp.b[m + j] = -u_min[j];
  }
  for (int i = 0; i < nb; ++i) {
    const int row = space.box_rows + i;
    qp.A.block(2 * m + i, 0, 1, m) = eff.A.row(row);
    qp.A(2 * m + i, m + i) = -1.0;  // a_i u - v_i <= b_i
    qp.b[2 * m + i] = eff.b[row];
    qp.A(2 * m + nb + i, m + i) = -1.0;  // v_i >= 0
    qp.b[2 * m + nb + i] = 0.0;
  }
  const QpSolution sol = solve_qp(qp, 1e-9);
  if (sol.status == QpStatus::Infeasible)
    throw std::logic_error("fallback_input: box unexpectedly empty");
  // the box is a hard physical limit; clip any solver drift
  Vec u = sol.z.head(m);
  for (int j = 0; j < m; ++j) u[j] = std::clamp(u[j], u_min[j], u_max[j]);
  return u;
}

SafetyFilter::SafetyFilter(FilterConfig cfg, Plant plant,
                           std::vector<BarrierSpec> barriers, Vec u_min, Vec u_max,
                           ObserverGains gains)
    : cfg_(std::move(cfg)),
      plant_(std::move(plant)),
      barriers_(std::move(barriers)),
      u_min_(std::move(u_min)),
      u_max_(std::move(u_max)),
      gains_(std::move(gains)) {
  cfg_.validate();
  for (const auto& b : barriers_) b.validate();
}

MarginMode SafetyFilter::margin_mode() const {
  switch (cfg_.method) {
    case FilterMethod::Nominal: return MarginMode::Nominal;
    case FilterMethod::WorstCaseRobust: return MarginMode::WorstCaseRobust;
    case FilterMethod::DobCbf: return MarginMode::Dob;
    case FilterMethod::VcbfNoDob: return MarginMode::Nominal;
    case FilterMethod::DobVcbf: return MarginMode::Dob;
  }
  return MarginMode::Nominal;
}

double SafetyFilter::vcbf_at(const Vec& x_bar, const Vec& d_hat_ext, double t,
                             Ellipsoid* ellipsoid_out) const {
  const FeasibleSpace fs = assemble_feasible_space(barriers_, plant_, u_min_, u_max_,
                                                   x_bar, d_hat_ext, gains_, t,
                                                   margin_mode());
  try {
    const Ellipsoid* warm = warm_ ? &*warm_ : nullptr;
    Ellipsoid e = max_inscribed_ellipsoid(fs.effective(), cfg_.mvie_tol, warm);
    warm_ = e;
    if (ellipsoid_out) *ellipsoid_out = e;
    return vcbf_value(e, cfg_.xi);
  } catch (const InfeasibleSpace&) {
    return -cfg_.xi;
  } catch (const ConvergenceFailure&) {
    return -cfg_.xi;
  }
}

Vec SafetyFilter::vcbf_gradient(const Vec& x_bar, const Vec& d_hat_ext, double t,
                                const Ellipsoid& base, std::vector<int>* one_sided) const {
  const int next = plant_.ext_dim();
  if (x_bar.size() != next) throw std::invalid_argument("vcbf_gradient: state size mismatch");
  const int tidx = next - 1;
  const double v_base = vcbf_value(base, cfg_.xi);

  auto probe = [&](const Vec& xp) -> std::optional<double> {
    const double tp = xp[tidx];
    const FeasibleSpace fs = assemble_feasible_space(barriers_, plant_, u_min_, u_max_,
                                                     xp, d_hat_ext, gains_, tp,
                                                     margin_mode());
    try {
      Ellipsoid e = max_inscribed_ellipsoid(fs.effective(), cfg_.mvie_tol, &base);
      return vcbf_value(e, cfg_.xi);
    } catch (const InfeasibleSpace&) {
      return std::nullopt;
    } catch (const ConvergenceFailure&) {
      return std::nullopt;
    }
  };

  Vec grad = Vec::Zero(next);
  Vec xp = x_bar;
  for (int i = 0; i < next; ++i) {
    const double h = cfg_.fd_step * std::max(1.0, std::abs(x_bar[i]));
    xp[i] = x_bar[i] + h;
    const auto vp = probe(xp);
    xp[i] = x_bar[i] - h;
    const auto vm = probe(xp);
    xp[i] = x_bar[i];
    if (vp && vm) {
      grad[i] = (*vp - *vm) / (2.0 * h);
    } else if (vp) {
      grad[i] = (*vp - v_base) / h;
      if (one_sided) one_sided->push_back(i);
    } else if (vm) {
      grad[i] = (v_base - *vm) / h;
      if (one_sided) one_sided->push_back(i);
    } else {
      grad[i] = 0.0;
      if (one_sided) one_sided->push_back(i);
    }
  }
  (void)t;
  return grad;
}

FilterOutput SafetyFilter::step(const Vec& x_bar, const Vec& u_ref,
                                const Vec& d_hat_ext, double t) {
  const int m = plant_.input_dim();
  if (u_ref.size() != m) throw std::invalid_argument("filter step: u_ref size mismatch");

  const FeasibleSpace fs = assemble_feasible_space(barriers_, plant_, u_min_, u_max_,
                                                   x_bar, d_hat_ext, gains_, t,
                                                   margin_mode());
  const Polytope eff = fs.effective();

  FilterOutput out;

  if (!uses_vcbf(cfg_.method)) {
    QpProblem qp;
    qp.H = 2.0 * Mat::Identity(m, m);
    qp.q = -2.0 * u_ref;
    qp.A = eff.A;
    qp.b = eff.b;
    const QpSolution sol = solve_qp(qp, 1e-9);
    out.qp_status = sol.status;
    if (sol.status == QpStatus::Infeasible) {
      out.u = fallback_input(fs, u_ref, u_min_, u_max_);
    } else {
      out.u = sol.z;
      out.active_rows = active_from_duals(sol.duals, eff.rows());
    }
    return out;
  }

  // VCBF modes: base ellipsoid, V_v gradient, slack-augmented QP.
  Ellipsoid base;
  double vv = -cfg_.xi;
  bool have_ellipsoid = false;
  {
    // vcbf_at assembles the same polytope; inline to reuse `eff`
    try {
      const Ellipsoid* warm = warm_ ? &*warm_ : nullptr;
      base = max_inscribed_ellipsoid(eff, cfg_.mvie_tol, warm);
      warm_ = base;
      vv = vcbf_value(base, cfg_.xi);
      have_ellipsoid = true;
    } catch (const InfeasibleSpace&) {
    } catch (const ConvergenceFailure&) {
    }
  }
  out.vcbf_value = vv;

  if (!have_ellipsoid) {
    // degraded: fall back to the plain constraint set for this step
    out.vcbf_degraded = true;
    QpProblem qp;
    qp.H = 2.0 * Mat::Identity(m, m);
    qp.q = -2.0 * u_ref;
    qp.A = eff.A;
    qp.b = eff.b;
    const QpSolution sol = solve_qp(qp, 1e-9);
    out.qp_status = sol.status;
    if (sol.status == QpStatus::Infeasible) {
      out.u = fallback_input(fs, u_ref, u_min_, u_max_);
    } else {
      out.u = sol.z;
      out.active_rows = active_from_duals(sol.duals, eff.rows());
    }
    return out;
  }

  const Vec grad = vcbf_gradient(x_bar, d_hat_ext, t, base, &out.one_sided_fd);
  const Vec fb = plant_.f_bar(x_bar);
  const Mat gb = plant_.g_bar(x_bar);
  const double lf_vv = grad.dot(fb);
  const Vec lg_vv = gb.transpose() * grad;
  double lambda_margin = 0.0;
  if (cfg_.method == FilterMethod::DobVcbf)
    lambda_margin = grad.dot(d_hat_ext) - grad.norm() * error_bound(t, gains_);

  const int k = eff.rows();
  QpProblem qp;
  qp.H = Mat::Zero(m + 1, m + 1);
  qp.H.topLeftCorner(m, m) = 2.0 * Mat::Identity(m, m);
  qp.H(m, m) = 2.0 * cfg_.slack_penalty;
  qp.q = Vec::Zero(m + 1);
  qp.q.head(m) = -2.0 * u_ref;
  qp.A = Mat::Zero(k + 1, m + 1);
  qp.A.topLeftCorner(k, m) = eff.A;
  qp.A.block(k, 0, 1, m) = -lg_vv.transpose();
  qp.A(k, m) = 1.0;
  qp.b = Vec(k + 1);
  qp.b.head(k) = eff.b;
  qp.b[k] = lf_vv + lambda_margin + cfg_.lambda_vv * vv;

  const QpSolution sol = solve_qp(qp, 1e-9);
  out.qp_status = sol.status;
  if (sol.status == QpStatus::Infeasible) {
    out.u = fallback_input(fs, u_ref, u_min_, u_max_);
    out.slack = 0.0;
  } else {
    out.u = sol.z.head(m);
    out.slack = sol.z[m];
    out.active_rows = active_from_duals(sol.duals, k + 1);
  }
  return out;
}

}  // namespace safecbf
