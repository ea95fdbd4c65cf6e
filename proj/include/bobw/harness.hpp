#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bobw/core.hpp"
#include "bobw/environments.hpp"
#include "bobw/metrics.hpp"
#include "bobw/policy.hpp"

#include "json.hpp"

namespace bobw::harness {

// Runs one trial end to end: for each round, select, draw, sample, update.
// The environment and the arm-sampling step consume two independent RNG
// streams derived from (master_seed, trial_index), so trials never share
// random state and adding trials never perturbs existing ones. The
// environment only ever sees history strictly before the current round.
TrialRecord run_single_trial(Policy& policy, Environment& env,
                                      std::int64_t horizon,
                                      std::uint64_t master_seed,
                                      std::int64_t trial_index);

// Per-trial post-processed results; the raw record is attached only when
// the plan asks for it.
struct TrialOutcome {
  std::int64_t trial_index = 0;
  Vec regret;  // cumulative regret trajectory, one entry per round
  double final_regret = 0.0;
  DataQuantities quantities;
  std::optional<TrialRecord> record;
};

// A batch of independent trials plus how to aggregate them. Factories are
// called once per trial on a worker thread and must be thread-safe;
// everything they return is confined to that worker.
struct TrialPlan {
  std::function<std::unique_ptr<Policy>(std::int64_t)> make_policy;
  std::function<std::unique_ptr<Environment>(std::int64_t)> make_environment;
  std::int64_t horizon = 0;
  std::uint64_t master_seed = 1;
  std::vector<std::int64_t> trials;
  int workers = 1;
  RegretMode regret_mode = RegretMode::PseudoStochastic;
  bool compute_q_infty = false;
  bool keep_records = false;  // attach records to on_trial outcomes
  // Observer invoked on the worker thread after each trial completes; must
  // be thread-safe. Outcomes arrive in completion order, not trial order.
  std::function<void(const TrialOutcome&)> on_trial;
};

struct AggregateResult {
  Vec mean_regret;  // per round, averaged over trials in trial order
  Vec se_regret;
  ScalarStats final_regret;
  ScalarStats l_star;
  ScalarStats v_1;
  ScalarStats c_realized;
  ScalarStats q_infty;  // all zero unless compute_q_infty
  Vec mean_pulls;                // per arm
  double wall_seconds = 0.0;
  int num_trials = 0;
};

// Runs plan.trials across plan.workers threads. The per-round mean and
// standard error are folded in trial order regardless of completion order,
// so outputs are byte-identical for any worker count.
AggregateResult run_trials(const TrialPlan& plan);

// JSON config layer used by the CLI and the C API. See docs/config_schema.md.
struct CliOverrides {
  std::string out_dir;  // empty: use config's output_dir, if any
  int workers = 0;      // 0: use config value or 1
  bool has_seed = false;
  std::uint64_t seed = 0;
};

// Builds a policy/environment pair from config specs. Exposed so tests and
// the acceptance suite reuse the exact CLI wiring.
std::unique_ptr<Policy> make_policy_from_spec(const nlohmann::json& spec,
                                              int num_arms,
                                              std::int64_t horizon);
std::unique_ptr<Environment> make_environment_from_spec(
    const nlohmann::json& spec);

// Runs a full experiment from a config object: trials, aggregation, data
// quantities, requested theory overlays. Returns the summary JSON; when an
// output directory is known it also writes trajectory.csv and summary.json.
nlohmann::json run_experiment_json(const nlohmann::json& config,
                                   const CliOverrides& overrides);

// Cartesian sweep over policies x horizons x epsilons; writes
// comparison.csv / comparison.json when an output directory is known.
nlohmann::json sweep_json(const nlohmann::json& config,
                          const CliOverrides& overrides);

// Evaluates one bound request (or an array of them) into BoundReport JSON.
nlohmann::json eval_bounds_json(const nlohmann::json& request);

// Numeric-claim suite: approximation error bounds, the h envelope, the
// moment-form equivalence, and the three closed-form maximizations, each
// cross-checked against independent numeric optimization. Options:
// approx_tol (default 0.06), refined_tol (0.006), quick (smaller grids).
nlohmann::json verify_claims_json(const nlohmann::json& options);

}  // namespace bobw::harness
