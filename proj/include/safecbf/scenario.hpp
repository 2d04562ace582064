#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "safecbf/barriers.hpp"
#include "safecbf/filters.hpp"
#include "safecbf/observer.hpp"
#include "safecbf/plants.hpp"

namespace safecbf {

struct SimSettings {
  double dt = 1e-3;
  double control_dt = 1e-2;
  double t_final = 10.0;
  double target_tolerance = 0.1;  // m
  std::uint64_t seed = 1;
  bool certificates = false;
};

/// Declarative closed-loop experiment description.
struct ScenarioConfig {
  Plant plant;
  Vec initial_state;  // physical state
  Vec target;         // 3 (blimp) or 2 (ackermann)
  Vec u_min, u_max;
  std::vector<BarrierSpec> barriers;
  ObserverGains observer;
  FilterConfig filter;
  DisturbanceSpec disturbance;
  SimSettings sim;
  // Monte Carlo ranges (lo, hi per coordinate), kept in the sim section
  std::optional<std::array<double, 6>> mc_initial_box;  // x, y, z
  std::optional<std::array<double, 6>> mc_gain_box;     // alpha, beta, gamma

  void validate() const;  // structural checks; throws std::invalid_argument
};

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& origin);
ScenarioConfig parse_scenario_file(const std::string& path);

/// Canonical, re-parseable rendering of a configuration.
std::string echo_config(const ScenarioConfig& cfg);

}  // namespace safecbf
