// Command-line front end: scenario runs, Monte Carlo studies, the ellipsoid
// debug command, and gain checking.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "safecbf/errors.hpp"
#include "safecbf/scenario.hpp"
#include "safecbf/sim.hpp"

namespace fs = std::filesystem;
using namespace safecbf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasibleStart = 3;

ScenarioConfig load_scenario(const std::string& path, const std::string& method_override) {
  ScenarioConfig cfg = parse_scenario_file(path);
  if (!method_override.empty()) {
    const auto m = filter_method_from_string(method_override);
    if (!m) throw ConfigError(0, "unknown filter method '" + method_override + "'");
    cfg.filter.method = *m;
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

int cmd_run(const std::string& scenario, const std::string& method,
            const std::string& out_dir, bool echo_only) {
  ScenarioConfig cfg = load_scenario(scenario, method);
  if (echo_only) {
    std::cout << echo_config(cfg);
    return kExitOk;
  }
  const SimLog log = run_scenario(cfg);
  const RunMetrics metrics = compute_metrics(log, cfg);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "log.csv", log.to_csv(cfg));
  write_file(fs::path(out_dir) / "metrics.json", metrics.to_json(cfg));
  std::cout << "rows written: " << log.rows.size() << "\n"
            << "min_h = " << metrics.min_h << ", min_Vv = " << metrics.min_vcbf
            << ", feasible_runtime = " << metrics.feasible_runtime
            << ", reached_target = " << (metrics.reached_target ? "yes" : "no") << "\n";
  if (log.integration_fault)
    std::cout << "integration fault: " << log.fault_message << "\n";
  return kExitOk;
}

int cmd_montecarlo(const std::string& scenario, int runs, const std::string& randomize,
                   std::uint64_t seed, const std::string& out_dir) {
  ScenarioConfig cfg = load_scenario(scenario, "");
  Randomization r;
  if (randomize == "initial") r = Randomization::InitialBox;
  else if (randomize == "gains") r = Randomization::GainBox;
  else throw ConfigError(0, "--randomize must be 'initial' or 'gains'");
  const MonteCarloSummary s = monte_carlo(cfg, runs, r, seed);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "summary.json", s.to_json());
  std::cout << "runs = " << s.runs << "\n"
            << "mean feasible runtime: dob_vcbf = " << s.mean_t1
            << " s, dob_cbf = " << s.mean_t2 << " s\n";
  return kExitOk;
}

int cmd_ellipsoid(const std::string& polytope_file) {
  std::ifstream f(polytope_file);
  if (!f) {
    std::cerr << "cannot open polytope file '" << polytope_file << "'\n";
    return kExitConfig;
  }
  int m = 0, k = 0;
  if (!(f >> m >> k) || m < 1 || k < 1) {
    std::cerr << "polytope file: first line must be 'm k'\n";
    return kExitConfig;
  }
  Polytope p;
  p.A.resize(k, m);
  p.b.resize(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j)
      if (!(f >> p.A(i, j))) {
        std::cerr << "polytope file: row " << i << " truncated\n";
        return kExitConfig;
      }
    if (!(f >> p.b[i])) {
      std::cerr << "polytope file: row " << i << " missing offset\n";
      return kExitConfig;
    }
  }
  const Ellipsoid e = max_inscribed_ellipsoid(p, 1e-8);
  std::cout << std::setprecision(12);
  std::cout << "B =";
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) std::cout << " " << e.B(i, j);
  std::cout << "\nc =";
  for (int i = 0; i < m; ++i) std::cout << " " << e.c[i];
  std::cout << "\ndet B = " << e.det_b() << "\n";
  std::cout << "V_v = " << vcbf_value(e, 1e-4) << "\n";
  return kExitOk;
}

int cmd_check_gains(const std::string& scenario) {
  const ScenarioConfig cfg = load_scenario(scenario, "");
  const ObserverGains& og = cfg.observer;
  bool ok = true;
  auto report = [&](const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    ok = ok && pass;
  };

  {
    std::ostringstream d;
    d << "beta = " << og.beta << " vs " << og.delta2 + og.delta3 / std::max(1.0, og.alpha - og.gamma);
    report("observer gain condition beta > delta2 + delta3/max(1, alpha-gamma)",
           og.gain_condition_ok(), d.str());
  }
  report("alpha > 1", og.alpha > 1.0, "");
  report("gamma > 0", og.gamma > 0.0, "");

  const double lambda_v = og.lambda_v();
  {
    std::ostringstream d;
    d << "lambda_V = " << lambda_v << ", lambda_Vv = " << cfg.filter.lambda_vv;
    report("lambda_V >= lambda_Vv", lambda_v >= cfg.filter.lambda_vv, d.str());
  }

  const Vec x0 = cfg.plant.extend(cfg.initial_state, 0.0);
  for (size_t i = 0; i < cfg.barriers.size(); ++i) {
    const auto& b = cfg.barriers[i];
    bool poles_ok = true;
    try {
      b.poles.validate();
    } catch (const std::exception&) {
      poles_ok = false;
    }
    report("barrier " + std::to_string(i) + " poles positive", poles_ok, "");
    if (!poles_ok) continue;
    const double lambda_r = b.poles.poles[0];
    {
      std::ostringstream d;
      d << "lambda_V = " << lambda_v << ", lambda_r = " << lambda_r;
      report("barrier " + std::to_string(i) + " lambda_V >= lambda_r",
             lambda_v >= lambda_r, d.str());
    }
    const ChainEval ev = eval_chain(b, x0, cfg.plant);
    report("barrier " + std::to_string(i) + " h(0) > 0", ev.h > 0.0,
           "h(0) = " + std::to_string(ev.h));
    const double phi_last = ev.phi[ev.phi.size() - 1];
    std::ostringstream d;
    d << "phi(0) = " << phi_last
      << ", beta1 = " << og.delta1 * og.delta1 / (2.0 * phi_last);
    report("barrier " + std::to_string(i) + " phi^{r-1}(0) > 0 (beta1 bound exists)",
           phi_last > 0.0, d.str());
  }

  // beta2 bound requires a positive initial feasible-space volume
  try {
    SafetyFilter filter(cfg.filter, cfg.plant, cfg.barriers, cfg.u_min, cfg.u_max, og);
    const Vec d0 = Vec::Zero(cfg.plant.ext_dim());
    const double vv0 = filter.vcbf_at(x0, d0, 0.0);
    std::ostringstream d;
    d << "V_v(0) = " << vv0;
    if (vv0 > 0.0) d << ", beta2 = " << og.delta1 * og.delta1 / (2.0 * vv0);
    report("V_v(0) > 0 (beta2 bound exists)", vv0 > 0.0, d.str());
  } catch (const std::exception& e) {
    report("V_v(0) > 0 (beta2 bound exists)", false, e.what());
  }

  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust safety-critical control simulator"};
  app.require_subcommand(1);

  std::string scenario, method, out_dir = "out", randomize = "initial", polytope_file;
  int runs = 50;
  std::uint64_t seed = 1;
  bool echo = false;

  auto* run = app.add_subcommand("run", "Run one closed-loop scenario");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--method", method, "Filter method override");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--echo-config", echo, "Print the canonical configuration and exit");

  auto* mc = app.add_subcommand("montecarlo", "Paired Monte Carlo study");
  mc->add_option("--scenario", scenario, "Scenario file")->required();
  mc->add_option("--runs", runs, "Number of runs");
  mc->add_option("--randomize", randomize, "initial | gains");
  mc->add_option("--seed", seed, "Base seed");
  mc->add_option("--out", out_dir, "Output directory");

  auto* el = app.add_subcommand("ellipsoid", "Inscribed ellipsoid of a polytope file");
  el->add_option("polytope", polytope_file, "Plain-text polytope ('m k' then rows)")
      ->required();

  auto* cg = app.add_subcommand("check-gains", "Validate observer/filter parameter conditions");
  cg->add_option("--scenario", scenario, "Scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario, method, out_dir, echo);
    if (mc->parsed()) return cmd_montecarlo(scenario, runs, randomize, seed, out_dir);
    if (el->parsed()) return cmd_ellipsoid(polytope_file);
    if (cg->parsed()) return cmd_check_gains(scenario);
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleInitialState& e) {
    std::cerr << "infeasible initial state: " << e.what() << "\n";
    return kExitInfeasibleStart;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
