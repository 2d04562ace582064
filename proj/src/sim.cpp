#include "safecbf/sim.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "safecbf/errors.hpp"

namespace safecbf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int thread_budget() {
  if (const char* env = std::getenv("SAFECBF_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

Vec position_of(const ScenarioConfig& cfg, const Vec& state) {
  return (cfg.plant.kind == PlantKind::Blimp) ? state.head(3) : Vec(state.head(2));
}

}  // namespace

SimLog run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const Plant& plant = cfg.plant;
  const int n = plant.state_dim();
  const int ne = plant.ext_dim();
  const int nd = plant.dist_dim();
  const int nb = static_cast<int>(cfg.barriers.size());
  const ObserverGains& og = cfg.observer;

  const Vec x_bar0 = plant.extend(cfg.initial_state, 0.0);
  for (const auto& b : cfg.barriers) {
    const ChainEval ev = eval_chain(b, x_bar0, plant);
    if (!(ev.h > 0.0))
      throw InfeasibleInitialState("initial state violates a barrier (h <= 0)");
  }

  // Certificate parameters, armed only when requested.
  Vec beta1;
  if (cfg.sim.certificates) {
    beta1.resize(nb);
    for (int i = 0; i < nb; ++i) {
      const ChainEval ev = eval_chain(cfg.barriers[i], x_bar0, plant);
      const double phi_last = ev.phi[ev.phi.size() - 1];
      if (!(phi_last > 0.0))
        throw std::invalid_argument(
            "certificates requested but phi^{r-1}(0) <= 0 for some barrier");
      beta1[i] = og.delta1 * og.delta1 / (2.0 * phi_last);
    }
    if (uses_vcbf(cfg.filter.method) && og.lambda_v() < cfg.filter.lambda_vv)
      throw std::invalid_argument("certificates requested but lambda_V < lambda_Vv");
  }

  SafetyFilter filter(cfg.filter, plant, cfg.barriers, cfg.u_min, cfg.u_max, og);

  const double dt = cfg.sim.dt;
  const long steps_per_control = std::lround(cfg.sim.control_dt / dt);
  const long n_controls = static_cast<long>(std::floor(cfg.sim.t_final / cfg.sim.control_dt + 1e-9));

  // Stacked integration state [x_bar; x_hat; z_aux; P].
  Vec s(3 * ne + 1);
  s.head(ne) = x_bar0;
  s.segment(ne, ne) = x_bar0;
  s.segment(2 * ne, ne).setZero();
  s[3 * ne] = 0.0;

  Vec u_cur = Vec::Zero(plant.input_dim());
  const double kappa = og.lambda_v();

  // preallocated RHS scratch
  Vec xb(ne), x_tilde(ne), d_hat(ne), d_ext(ne), d_dot_ext(ne), sgn(ne), rate(ne);
  Vec d_phys(nd), d_dot_phys(nd);
  d_ext.setZero();
  d_dot_ext.setZero();

  auto eval_disturbance = [&](double t, Vec& d, Vec& ddot) {
    if (cfg.disturbance.kind == DisturbanceSpec::Kind::Constant) {
      d = cfg.disturbance.amplitude;
      ddot.setZero();
    } else {
      const double w = cfg.disturbance.frequency;
      for (int i = 0; i < nd; ++i) {
        const double ph = (cfg.disturbance.phase.size() > i) ? cfg.disturbance.phase[i] : 0.0;
        d[i] = cfg.disturbance.amplitude[i] * std::sin(w * t + ph);
        ddot[i] = cfg.disturbance.amplitude[i] * w * std::cos(w * t + ph);
      }
    }
  };

  auto scatter_dist = [&](const Vec& d, Vec& ext) {
    if (plant.kind == PlantKind::Blimp) {
      ext[4] = d[0];
      ext[5] = d[1];
      ext[6] = d[2];
    } else {
      ext[2] = d[0] / plant.ackermann.mass;
    }
  };

  auto rhs = [&](const Vec& sv, Vec& out) {
    xb = sv.head(ne);
    const double t = xb[ne - 1];
    eval_disturbance(t, d_phys, d_dot_phys);
    scatter_dist(d_phys, d_ext);
    scatter_dist(d_dot_phys, d_dot_ext);
    plant.rate_into(xb, u_cur, rate);
    x_tilde = xb - sv.segment(ne, ne);
    d_hat = og.gamma * x_tilde + sv.segment(2 * ne, ne);
    for (int i = 0; i < ne; ++i) {
      const double v = x_tilde[i];
      sgn[i] = (og.sign_eps > 0.0) ? std::tanh(v / og.sign_eps)
                                   : (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
    out.head(ne) = rate + d_ext;
    out.segment(ne, ne) = rate + d_hat + og.alpha * x_tilde;
    out.segment(2 * ne, ne) = (og.gamma * og.alpha + 1.0) * x_tilde + og.beta * sgn;
    const double L = (d_ext - d_hat).dot(-og.beta * sgn + d_dot_ext);
    out[3 * ne] = -kappa * sv[3 * ne] - L;
  };

  SimLog log;
  log.rows.reserve(static_cast<size_t>(n_controls + 1));
  double beta2 = cfg.filter.beta2;

  Vec k1(s.size()), k2(s.size()), k3(s.size()), k4(s.size()), tmp(s.size()), snew(s.size());
  const Vec zero_dhat = Vec::Zero(ne);

  for (long k = 0; k <= n_controls; ++k) {
    const double t_k = static_cast<double>(k) * cfg.sim.control_dt;
    xb = s.head(ne);
    x_tilde = xb - s.segment(ne, ne);
    d_hat = og.gamma * x_tilde + s.segment(2 * ne, ne);
    const Vec& d_used = uses_observer(cfg.filter.method) ? d_hat : zero_dhat;

    const Vec u_ref = plant.reference(xb, cfg.target, d_used);
    FilterOutput fo = filter.step(xb, u_ref, d_used, t_k);
    u_cur = fo.u;

    LogRow row;
    row.t = t_k;
    row.state = xb.head(n);
    row.u_ref = u_ref;
    row.u = fo.u;
    row.slack = fo.slack;
    row.qp_status = fo.qp_status;
    row.h.resize(nb);
    row.phi1.resize(nb);
    double min_beta1_phi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nb; ++i) {
      const ChainEval ev = eval_chain(cfg.barriers[i], xb, plant);
      row.h[i] = ev.h;
      row.phi1[i] = ev.phi[ev.phi.size() - 1];
      if (cfg.sim.certificates)
        min_beta1_phi = std::min(min_beta1_phi, beta1[i] * row.phi1[i]);
    }
    row.vcbf = fo.vcbf_value ? *fo.vcbf_value : filter.vcbf_at(xb, d_used, t_k);

    eval_disturbance(t_k, d_phys, d_dot_phys);
    scatter_dist(d_phys, d_ext);
    row.d_true = d_ext.head(n);
    row.d_hat = d_hat.head(n);
    row.d_err_norm = (d_ext - d_hat).norm();
    row.lemma2_bound = error_bound(t_k, og);

    if (cfg.sim.certificates) {
      const double V = lyapunov_value(x_tilde, d_ext - d_hat, s[3 * ne]);
      row.hbar = min_beta1_phi - V;
      if (uses_vcbf(cfg.filter.method)) {
        if (beta2 <= 0.0 && k == 0) {
          if (!(row.vcbf > 0.0))
            throw std::invalid_argument("certificates requested but V_v(0) <= 0");
          beta2 = og.delta1 * og.delta1 / (2.0 * row.vcbf);
        }
        row.hbar_v = beta2 * row.vcbf - V;
      } else {
        row.hbar_v = kNaN;
      }
    } else {
      row.hbar = kNaN;
      row.hbar_v = kNaN;
    }
    row.active_rows = fo.active_rows;
    log.rows.push_back(std::move(row));

    const Vec pos = position_of(cfg, xb);
    const Vec tgt = cfg.target;
    if ((pos - tgt).norm() <= cfg.sim.target_tolerance) break;
    if (k == n_controls) break;

    try {
      for (long step = 0; step < steps_per_control; ++step) {
        rk4_step_inplace(rhs, s, dt, k1, k2, k3, k4, tmp, snew);
        s = snew;
      }
    } catch (const IntegrationFault& e) {
      log.integration_fault = true;
      log.fault_message = e.what();
      break;
    }
  }
  return log;
}

RunMetrics compute_metrics(const SimLog& log, const ScenarioConfig& cfg) {
  RunMetrics m;
  m.min_h = std::numeric_limits<double>::infinity();
  m.min_vcbf = std::numeric_limits<double>::infinity();
  m.feasible_runtime = cfg.sim.t_final;
  m.time_to_target = cfg.sim.t_final;
  bool infeasible_seen = false;
  for (const auto& row : log.rows) {
    if (row.h.size()) m.min_h = std::min(m.min_h, row.h.minCoeff());
    m.min_vcbf = std::min(m.min_vcbf, row.vcbf);
    m.max_slack = std::max(m.max_slack, std::abs(row.slack));
    if (!infeasible_seen && row.qp_status == QpStatus::Infeasible) {
      infeasible_seen = true;
      m.feasible_runtime = row.t;
    }
  }
  if (!log.rows.empty()) {
    const auto& last = log.rows.back();
    const Vec pos = position_of(cfg, last.state);
    if ((pos - cfg.target).norm() <= cfg.sim.target_tolerance) {
      m.reached_target = true;
      m.time_to_target = last.t;
    }
  }
  return m;
}

MonteCarloSummary monte_carlo(const ScenarioConfig& base, int n_runs,
                              Randomization randomization, std::uint64_t seed) {
  if (n_runs < 1) throw std::invalid_argument("monte_carlo: need at least one run");
  base.validate();
  if (randomization == Randomization::InitialBox && !base.mc_initial_box)
    throw std::invalid_argument("monte_carlo: scenario lacks mc_initial_box");
  if (randomization == Randomization::GainBox && !base.mc_gain_box)
    throw std::invalid_argument("monte_carlo: scenario lacks mc_gain_box");
  if (randomization == Randomization::GainBox) {
    const auto& b = *base.mc_gain_box;
    const double alpha_lo = b[0], beta_lo = b[2], gamma_hi = b[5];
    if (!(alpha_lo > 1.0))
      throw std::invalid_argument("monte_carlo: alpha range dips at or below 1");
    const double need =
        base.observer.delta2 + base.observer.delta3 / std::max(1.0, alpha_lo - gamma_hi);
    if (!(beta_lo > need))
      throw std::invalid_argument("monte_carlo: beta range violates the gain condition");
  }

  MonteCarloSummary summary;
  summary.runs = n_runs;
  summary.t1.assign(static_cast<size_t>(n_runs), 0.0);
  summary.t2.assign(static_cast<size_t>(n_runs), 0.0);

  auto run_pair = [&](int idx) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(idx) + 1));
    ScenarioConfig cfg = base;
    cfg.sim.certificates = false;
    if (randomization == Randomization::InitialBox) {
      const auto& b = *base.mc_initial_box;
      for (int c = 0; c < 3 && c < cfg.initial_state.size(); ++c) {
        std::uniform_real_distribution<double> dist(b[2 * c], b[2 * c + 1]);
        cfg.initial_state[c] = dist(rng);
      }
    } else {
      const auto& b = *base.mc_gain_box;
      std::uniform_real_distribution<double> da(b[0], b[1]), db(b[2], b[3]), dg(b[4], b[5]);
      cfg.observer.alpha = da(rng);
      cfg.observer.beta = db(rng);
      cfg.observer.gamma = dg(rng);
    }
    const double cap = 20.0;
    ScenarioConfig c1 = cfg;
    c1.filter.method = FilterMethod::DobVcbf;
    const RunMetrics m1 = compute_metrics(run_scenario(c1), c1);
    summary.t1[static_cast<size_t>(idx)] = std::min(m1.feasible_runtime, cap);
    ScenarioConfig c2 = cfg;
    c2.filter.method = FilterMethod::DobCbf;
    const RunMetrics m2 = compute_metrics(run_scenario(c2), c2);
    summary.t2[static_cast<size_t>(idx)] = std::min(m2.feasible_runtime, cap);
  };

  const int workers = std::min(thread_budget(), n_runs);
  if (workers <= 1) {
    for (int i = 0; i < n_runs; ++i) run_pair(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) run_pair(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (int i = 0; i < n_runs; ++i) {
    summary.mean_t1 += summary.t1[static_cast<size_t>(i)];
    summary.mean_t2 += summary.t2[static_cast<size_t>(i)];
  }
  summary.mean_t1 /= n_runs;
  summary.mean_t2 /= n_runs;
  return summary;
}

std::string SimLog::to_csv(const ScenarioConfig& cfg) const {
  const int n = cfg.plant.state_dim();
  const int m = cfg.plant.input_dim();
  const int nb = static_cast<int>(cfg.barriers.size());
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t";
  for (int i = 0; i < n; ++i) os << ",state_" << i;
  for (int i = 0; i < m; ++i) os << ",u_ref_" << i;
  for (int i = 0; i < m; ++i) os << ",u_" << i;
  os << ",slack,qp_status";
  for (int i = 0; i < nb; ++i) os << ",h_" << i;
  for (int i = 0; i < nb; ++i) os << ",phi1_" << i;
  os << ",Vv";
  for (int i = 0; i < n; ++i) os << ",d_true_" << i;
  for (int i = 0; i < n; ++i) os << ",d_hat_" << i;
  os << ",d_err_norm,lemma2_bound,hbar,hbar_V,active_rows\n";
  for (const auto& r : rows) {
    os << r.t;
    for (int i = 0; i < n; ++i) os << "," << r.state[i];
    for (int i = 0; i < m; ++i) os << "," << r.u_ref[i];
    for (int i = 0; i < m; ++i) os << "," << r.u[i];
    os << "," << r.slack << "," << to_string(r.qp_status);
    for (int i = 0; i < nb; ++i) os << "," << r.h[i];
    for (int i = 0; i < nb; ++i) os << "," << r.phi1[i];
    os << "," << r.vcbf;
    for (int i = 0; i < n; ++i) os << "," << r.d_true[i];
    for (int i = 0; i < n; ++i) os << "," << r.d_hat[i];
    os << "," << r.d_err_norm << "," << r.lemma2_bound << "," << r.hbar << "," << r.hbar_v;
    os << ",";
    for (size_t i = 0; i < r.active_rows.size(); ++i) {
      if (i) os << ";";
      os << r.active_rows[i];
    }
    os << "\n";
  }
  return os.str();
}

std::string RunMetrics::to_json(const ScenarioConfig& cfg) const {
  nlohmann::ordered_json j;
  j["method"] = to_string(cfg.filter.method);
  j["min_h"] = min_h;
  j["min_Vv"] = min_vcbf;
  j["reached_target"] = reached_target;
  j["time_to_target"] = time_to_target;
  j["feasible_runtime"] = feasible_runtime;
  j["max_slack"] = max_slack;
  return j.dump(2) + "\n";
}

std::string MonteCarloSummary::to_json() const {
  nlohmann::ordered_json j;
  j["runs"] = runs;
  j["mean_feasible_runtime"] = {{"dob_vcbf", mean_t1}, {"dob_cbf", mean_t2}};
  j["per_run"] = {{"dob_vcbf", t1}, {"dob_cbf", t2}};
  return j.dump(2) + "\n";
}

}  // namespace safecbf
