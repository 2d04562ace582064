#pragma once

#include <string>
#include <vector>

#include "safecbf/scenario.hpp"

namespace safecbf {

/// One logged control instant. d_true / d_hat are full physical-state-dim
/// vectors (the observer also sees transient components off the disturbed
/// slots).
struct LogRow {
  double t = 0.0;
  Vec state;
  Vec u_ref;
  Vec u;
  double slack = 0.0;
  QpStatus qp_status = QpStatus::Optimal;
  Vec h;     // per barrier
  Vec phi1;  // per barrier, phi^1 (equals h for r = 1)
  double vcbf = 0.0;
  Vec d_true;
  Vec d_hat;
  double d_err_norm = 0.0;
  double lemma2_bound = 0.0;
  double hbar = 0.0;    // NaN when certificates are off
  double hbar_v = 0.0;  // NaN unless a VCBF method with certificates on
  std::vector<int> active_rows;
};

struct SimLog {
  std::vector<LogRow> rows;
  bool integration_fault = false;
  std::string fault_message;

  std::string to_csv(const ScenarioConfig& cfg) const;
};

struct RunMetrics {
  double min_h = 0.0;
  double min_vcbf = 0.0;
  bool reached_target = false;
  double time_to_target = 0.0;  // t_final when never reached
  double feasible_runtime = 0.0;
  double max_slack = 0.0;

  std::string to_json(const ScenarioConfig& cfg) const;
};

/// Closed-loop rollout: plant + observer integrate at dt, the safety filter
/// runs zero-order hold at control_dt. Deterministic for a fixed config.
/// Throws InfeasibleInitialState when some barrier starts violated.
SimLog run_scenario(const ScenarioConfig& cfg);

RunMetrics compute_metrics(const SimLog& log, const ScenarioConfig& cfg);

enum class Randomization { InitialBox, GainBox };

struct MonteCarloSummary {
  int runs = 0;
  double mean_t1 = 0.0;  // DOB-VCBF mean feasible runtime
  double mean_t2 = 0.0;  // DOB-CBF mean feasible runtime
  std::vector<double> t1;
  std::vector<double> t2;

  std::string to_json() const;
};

/// Paired Monte Carlo study: each seeded draw runs both the DOB-VCBF and the
/// DOB-CBF filter on the same randomized scenario. Feasible runtimes are
/// capped at 20 s. Parallelism is bounded by SAFECBF_THREADS; aggregation is
/// per-index and therefore order-independent.
MonteCarloSummary monte_carlo(const ScenarioConfig& base, int n_runs,
                              Randomization randomization, std::uint64_t seed);

}  // namespace safecbf
