#include "safecbf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "safecbf/errors.hpp"

namespace safecbf {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

struct KeyValue {
  std::string key;
  std::string value;
  int line;
};

double parse_double(const KeyValue& kv) {
  try {
    size_t pos = 0;
    const double v = std::stod(kv.value, &pos);
    if (trim(kv.value.substr(pos)).size())
      throw ConfigError(kv.line, "trailing characters after number in '" + kv.key + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(kv.line, "expected a number for '" + kv.key + "', got '" + kv.value + "'");
  }
}

Vec parse_vec(const KeyValue& kv) {
  std::istringstream is(kv.value);
  std::vector<double> vals;
  std::string tok;
  while (is >> tok) {
    try {
      size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw ConfigError(kv.line, "expected numbers for '" + kv.key + "', got '" + tok + "'");
    }
  }
  if (vals.empty()) throw ConfigError(kv.line, "empty value for '" + kv.key + "'");
  Vec v(static_cast<int>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
  return v;
}

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "1" || kv.value == "true" || kv.value == "on") return true;
  if (kv.value == "0" || kv.value == "false" || kv.value == "off") return false;
  throw ConfigError(kv.line, "expected a boolean for '" + kv.key + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << " ";
    os << fmt(v[i]);
  }
  return os.str();
}

}  // namespace

void ScenarioConfig::validate() const {
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  if (initial_state.size() != n)
    throw std::invalid_argument("scenario: initial state must have " + std::to_string(n) +
                                " components");
  const int tgt = (plant.kind == PlantKind::Blimp) ? 3 : 2;
  if (target.size() != tgt)
    throw std::invalid_argument("scenario: target must have " + std::to_string(tgt) +
                                " components");
  if (u_min.size() != m || u_max.size() != m)
    throw std::invalid_argument("scenario: input box must match the input dimension");
  for (int j = 0; j < m; ++j)
    if (!(u_min[j] < u_max[j]))
      throw std::invalid_argument("scenario: u_min must be strictly below u_max");
  if (barriers.empty()) throw std::invalid_argument("scenario: need at least one barrier");
  for (const auto& b : barriers) {
    b.validate();
    const bool sphere = b.kind == BarrierKind::SphereSignedDistance;
    if (sphere != (plant.kind == PlantKind::Blimp))
      throw std::invalid_argument("scenario: barrier kind does not match the plant");
  }
  observer.validate();
  filter.validate();
  const int nd = plant.dist_dim();
  if (disturbance.amplitude.size() != nd)
    throw std::invalid_argument("scenario: disturbance needs " + std::to_string(nd) +
                                " channels");
  {
    // the Lemma-style bounds apply to the state-space (lifted) disturbance
    DisturbanceSpec lifted = disturbance;
    lifted.amplitude = plant.dist_to_extended(disturbance.amplitude).head(n);
    lifted.delta1 = observer.delta1;
    lifted.delta2 = observer.delta2;
    lifted.delta3 = observer.delta3;
    if (!lifted.bounds_consistent())
      throw std::invalid_argument(
          "scenario: observer (delta1, delta2, delta3) do not cover the disturbance");
  }
  if (!(sim.dt > 0.0) || !(sim.control_dt > 0.0) || !(sim.t_final > 0.0))
    throw std::invalid_argument("scenario: dt, control_dt, t_final must be positive");
  if (sim.dt > sim.control_dt + 1e-15)
    throw std::invalid_argument("scenario: dt must not exceed control_dt");
  const double ratio = sim.control_dt / sim.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6)
    throw std::invalid_argument("scenario: control_dt must be an integer multiple of dt");
  if (!(sim.target_tolerance > 0.0))
    throw std::invalid_argument("scenario: target_tolerance must be positive");
}

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin) {
  ScenarioConfig cfg;
  bool plant_seen = false, observer_seen = false, filter_seen = false,
       disturbance_seen = false, sim_seen = false;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  std::string section;
  BarrierSpec* barrier = nullptr;

  auto handle = [&](const KeyValue& kv) {
    if (section == "plant") {
      plant_seen = true;
      if (kv.key == "kind") {
        if (kv.value == "blimp") cfg.plant.kind = PlantKind::Blimp;
        else if (kv.value == "ackermann") cfg.plant.kind = PlantKind::Ackermann;
        else throw ConfigError(kv.line, "unknown plant kind '" + kv.value + "'");
      } else if (kv.key == "mass") {
        cfg.plant.blimp.mass = cfg.plant.ackermann.mass = parse_double(kv);
      } else if (kv.key == "inertia") {
        cfg.plant.blimp.inertia = parse_double(kv);
      } else if (kv.key == "drag") {
        cfg.plant.blimp.drag = parse_double(kv);
      } else if (kv.key == "initial") {
        cfg.initial_state = parse_vec(kv);
      } else if (kv.key == "target") {
        cfg.target = parse_vec(kv);
      } else if (kv.key == "ref_gains") {
        const Vec v = parse_vec(kv);
        if (v.size() == 5) {
          cfg.plant.blimp_gains = {v[0], v[1], v[2], v[3], v[4]};
        } else if (v.size() == 3) {
          cfg.plant.ackermann_gains = {v[0], v[1], v[2]};
        } else {
          throw ConfigError(kv.line, "ref_gains needs 5 (blimp) or 3 (ackermann) values");
        }
      } else if (kv.key == "u_min") {
        cfg.u_min = parse_vec(kv);
      } else if (kv.key == "u_max") {
        cfg.u_max = parse_vec(kv);
      } else {
        throw ConfigError(kv.line, "unknown plant key '" + kv.key + "'");
      }
    } else if (section == "barrier") {
      if (kv.key == "kind") {
        if (kv.value == "sphere") barrier->kind = BarrierKind::SphereSignedDistance;
        else if (kv.value == "squared_distance_2d") barrier->kind = BarrierKind::SquaredDistance2D;
        else throw ConfigError(kv.line, "unknown barrier kind '" + kv.value + "'");
      } else if (kv.key == "center") {
        barrier->center = parse_vec(kv);
      } else if (kv.key == "radius" || kv.key == "min_dist") {
        barrier->radius = parse_double(kv);
      } else if (kv.key == "poles") {
        barrier->poles = PoleSet(parse_vec(kv));
      } else {
        throw ConfigError(kv.line, "unknown barrier key '" + kv.key + "'");
      }
    } else if (section == "observer") {
      observer_seen = true;
      if (kv.key == "alpha") cfg.observer.alpha = parse_double(kv);
      else if (kv.key == "beta") cfg.observer.beta = parse_double(kv);
      else if (kv.key == "gamma") cfg.observer.gamma = parse_double(kv);
      else if (kv.key == "delta1") cfg.observer.delta1 = parse_double(kv);
      else if (kv.key == "delta2") cfg.observer.delta2 = parse_double(kv);
      else if (kv.key == "delta3") cfg.observer.delta3 = parse_double(kv);
      else if (kv.key == "sign_eps") cfg.observer.sign_eps = parse_double(kv);
      else throw ConfigError(kv.line, "unknown observer key '" + kv.key + "'");
    } else if (section == "filter") {
      filter_seen = true;
      if (kv.key == "method") {
        const auto m = filter_method_from_string(kv.value);
        if (!m) throw ConfigError(kv.line, "unknown filter method '" + kv.value + "'");
        cfg.filter.method = *m;
      } else if (kv.key == "lambda_vv") cfg.filter.lambda_vv = parse_double(kv);
      else if (kv.key == "xi") cfg.filter.xi = parse_double(kv);
      else if (kv.key == "M") cfg.filter.slack_penalty = parse_double(kv);
      else if (kv.key == "beta2") cfg.filter.beta2 = parse_double(kv);
      else if (kv.key == "fd_step") cfg.filter.fd_step = parse_double(kv);
      else if (kv.key == "mvie_tol") cfg.filter.mvie_tol = parse_double(kv);
      else throw ConfigError(kv.line, "unknown filter key '" + kv.key + "'");
    } else if (section == "disturbance") {
      disturbance_seen = true;
      if (kv.key == "kind") {
        if (kv.value == "constant") cfg.disturbance.kind = DisturbanceSpec::Kind::Constant;
        else if (kv.value == "sinusoid") cfg.disturbance.kind = DisturbanceSpec::Kind::Sinusoid;
        else throw ConfigError(kv.line, "unknown disturbance kind '" + kv.value + "'");
      } else if (kv.key == "amplitude") cfg.disturbance.amplitude = parse_vec(kv);
      else if (kv.key == "frequency") cfg.disturbance.frequency = parse_double(kv);
      else if (kv.key == "phase") cfg.disturbance.phase = parse_vec(kv);
      else throw ConfigError(kv.line, "unknown disturbance key '" + kv.key + "'");
    } else if (section == "sim") {
      sim_seen = true;
      if (kv.key == "dt") cfg.sim.dt = parse_double(kv);
      else if (kv.key == "control_dt") cfg.sim.control_dt = parse_double(kv);
      else if (kv.key == "t_final") cfg.sim.t_final = parse_double(kv);
      else if (kv.key == "target_tolerance") cfg.sim.target_tolerance = parse_double(kv);
      else if (kv.key == "seed") cfg.sim.seed = static_cast<std::uint64_t>(parse_double(kv));
      else if (kv.key == "certificates") cfg.sim.certificates = parse_bool(kv);
      else if (kv.key == "mc_initial_box" || kv.key == "mc_gain_box") {
        const Vec v = parse_vec(kv);
        if (v.size() != 6) throw ConfigError(kv.line, "'" + kv.key + "' needs 6 numbers");
        std::array<double, 6> box;
        for (int i = 0; i < 6; ++i) box[static_cast<size_t>(i)] = v[i];
        if (kv.key == "mc_initial_box") cfg.mc_initial_box = box;
        else cfg.mc_gain_box = box;
      } else {
        throw ConfigError(kv.line, "unknown sim key '" + kv.key + "'");
      }
    } else {
      throw ConfigError(kv.line, "key outside any section");
    }
  };

  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "barrier") {
        cfg.barriers.emplace_back();
        barrier = &cfg.barriers.back();
      } else if (section != "plant" && section != "observer" && section != "filter" &&
                 section != "disturbance" && section != "sim") {
        throw ConfigError(lineno, "unknown section '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (kv.key.empty()) throw ConfigError(lineno, "empty key");
    handle(kv);
  }

  if (!plant_seen) throw ConfigError(0, origin + ": missing [plant] section");
  if (cfg.barriers.empty()) throw ConfigError(0, origin + ": missing [barrier] section");
  if (!observer_seen) throw ConfigError(0, origin + ": missing [observer] section");
  if (!filter_seen) throw ConfigError(0, origin + ": missing [filter] section");
  if (!disturbance_seen) throw ConfigError(0, origin + ": missing [disturbance] section");
  if (!sim_seen) throw ConfigError(0, origin + ": missing [sim] section");

  // the observer's declared bounds are the single source of truth
  cfg.disturbance.delta1 = cfg.observer.delta1;
  cfg.disturbance.delta2 = cfg.observer.delta2;
  cfg.disturbance.delta3 = cfg.observer.delta3;

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, origin + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "cannot open scenario file '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_scenario_text(os.str(), path);
}

std::string echo_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "[plant]\n";
  os << "kind = " << (cfg.plant.kind == PlantKind::Blimp ? "blimp" : "ackermann") << "\n";
  if (cfg.plant.kind == PlantKind::Blimp) {
    os << "mass = " << fmt(cfg.plant.blimp.mass) << "\n";
    os << "inertia = " << fmt(cfg.plant.blimp.inertia) << "\n";
    os << "drag = " << fmt(cfg.plant.blimp.drag) << "\n";
    const auto& g = cfg.plant.blimp_gains;
    os << "ref_gains = " << fmt(g.k_v) << " " << fmt(g.k_x) << " " << fmt(g.k_w) << " "
       << fmt(g.k_z) << " " << fmt(g.k_psi) << "\n";
  } else {
    os << "mass = " << fmt(cfg.plant.ackermann.mass) << "\n";
    const auto& g = cfg.plant.ackermann_gains;
    os << "ref_gains = " << fmt(g.k_omega) << " " << fmt(g.k_p) << " " << fmt(g.k_v) << "\n";
  }
  os << "initial = " << fmt_vec(cfg.initial_state) << "\n";
  os << "target = " << fmt_vec(cfg.target) << "\n";
  os << "u_min = " << fmt_vec(cfg.u_min) << "\n";
  os << "u_max = " << fmt_vec(cfg.u_max) << "\n";
  for (const auto& b : cfg.barriers) {
    os << "\n[barrier]\n";
    if (b.kind == BarrierKind::SphereSignedDistance) {
      os << "kind = sphere\n";
      os << "center = " << fmt_vec(b.center) << "\n";
      os << "radius = " << fmt(b.radius) << "\n";
    } else {
      os << "kind = squared_distance_2d\n";
      os << "center = " << fmt_vec(b.center) << "\n";
      os << "min_dist = " << fmt(b.radius) << "\n";
    }
    os << "poles = " << fmt_vec(b.poles.poles) << "\n";
  }
  os << "\n[observer]\n";
  os << "alpha = " << fmt(cfg.observer.alpha) << "\n";
  os << "beta = " << fmt(cfg.observer.beta) << "\n";
  os << "gamma = " << fmt(cfg.observer.gamma) << "\n";
  os << "delta1 = " << fmt(cfg.observer.delta1) << "\n";
  os << "delta2 = " << fmt(cfg.observer.delta2) << "\n";
  os << "delta3 = " << fmt(cfg.observer.delta3) << "\n";
  os << "sign_eps = " << fmt(cfg.observer.sign_eps) << "\n";
  os << "\n[filter]\n";
  os << "method = " << to_string(cfg.filter.method) << "\n";
  os << "lambda_vv = " << fmt(cfg.filter.lambda_vv) << "\n";
  os << "xi = " << fmt(cfg.filter.xi) << "\n";
  os << "M = " << fmt(cfg.filter.slack_penalty) << "\n";
  os << "beta2 = " << fmt(cfg.filter.beta2) << "\n";
  os << "fd_step = " << fmt(cfg.filter.fd_step) << "\n";
  os << "mvie_tol = " << fmt(cfg.filter.mvie_tol) << "\n";
  os << "\n[disturbance]\n";
  os << "kind = "
     << (cfg.disturbance.kind == DisturbanceSpec::Kind::Constant ? "constant" : "sinusoid")
     << "\n";
  os << "amplitude = " << fmt_vec(cfg.disturbance.amplitude) << "\n";
  if (cfg.disturbance.kind == DisturbanceSpec::Kind::Sinusoid) {
    os << "frequency = " << fmt(cfg.disturbance.frequency) << "\n";
    if (cfg.disturbance.phase.size())
      os << "phase = " << fmt_vec(cfg.disturbance.phase) << "\n";
  }
  os << "\n[sim]\n";
  os << "dt = " << fmt(cfg.sim.dt) << "\n";
  os << "control_dt = " << fmt(cfg.sim.control_dt) << "\n";
  os << "t_final = " << fmt(cfg.sim.t_final) << "\n";
  os << "target_tolerance = " << fmt(cfg.sim.target_tolerance) << "\n";
  os << "seed = " << cfg.sim.seed << "\n";
  os << "certificates = " << (cfg.sim.certificates ? 1 : 0) << "\n";
  auto write_box = [&](const char* key, const std::array<double, 6>& box) {
    os << key << " =";
    for (double v : box) os << " " << fmt(v);
    os << "\n";
  };
  if (cfg.mc_initial_box) write_box("mc_initial_box", *cfg.mc_initial_box);
  if (cfg.mc_gain_box) write_box("mc_gain_box", *cfg.mc_gain_box);
  return os.str();
}

}  // namespace safecbf
