#pragma once
// The proposed bandit policy: optimistic FTRL with the hybrid log-barrier /
// complementary-entropy regularizer, a running-mean loss hint, and per-arm
// regularizer weights that grow with the squared hint error.

#include <cstdint>
#include <memory>
#include <string>

#include "bobw/core.hpp"
#include "bobw/ftrl.hpp"

namespace bobw {

// Common protocol for every policy in the library. A round is one select()
// followed by one update(); the order is enforced (StateError otherwise).
// select() returns a distribution over arms; deterministic policies return a
// point mass. Sampling from the returned weights is the caller's job (see
// sample_arm), so a single uniform draw drives the whole round.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const char* name() const = 0;
  virtual int num_arms() const = 0;
  virtual Vec select() = 0;
  virtual void update(int arm, double observed_loss) = 0;
};

enum class HintMode {
  EmpiricalMean,  // running mean with a pseudo-observation of 1/2
  Ewma,           // exponentially weighted mean, geared to path-length bounds
};

struct PolicyConfig {
  int num_arms = 2;
  std::int64_t horizon = 0;  // T; the policy tunes itself with gamma = log T
  double epsilon = 0.2;      // weight floor is beta0 = 1 + epsilon
  HintMode hint_mode = HintMode::EmpiricalMean;
  double ewma_eta = 0.25;    // Ewma step, must lie in (0, 1/2)
  ftrl::SolveOptions solver;

  // ConfigError on violations: num_arms >= 2, horizon >= max(55, num_arms),
  // epsilon in (0, 1/2], ewma_eta in (0, 1/2) when hint_mode is Ewma.
  void validate() const;
};

// Loss estimate used by the policy: the hint everywhere, plus an
// importance-weighted correction on the played arm,
//   est_i = hint_i + 1[i == arm] * (observed - hint_arm) / p_arm.
// Conditionally unbiased: sum_i p_i * est(arm=i) recovers the full vector.
Vec estimate_loss(const Vec& p, const Vec& hint, int arm, double observed);

// Weight-growth increment for the played arm:
//   (observed - hint_arm)^2 * min{1, 2*(1 - p_arm) / (p_arm^2 * gamma)}.
// Always in [0, 1].
double alpha_increment(double observed, double hint_arm, double p_arm,
                       double gamma);

class BobwPolicy : public Policy {
 public:
  explicit BobwPolicy(PolicyConfig config);

  const char* name() const override;
  int num_arms() const override { return config_.num_arms; }

  // Solves the FTRL step for the current round. The returned vector is
  // strictly interior and passes validate_simplex.
  Vec select() override;
  void update(int arm, double observed_loss) override;

  // State access, used by snapshots, tests, and invariant monitors.
  const PolicyConfig& config() const { return config_; }
  std::int64_t round() const { return round_; }  // rounds completed
  double gamma() const { return gamma_; }
  double beta0() const { return 1.0 + config_.epsilon; }
  Vec hint() const;                 // m(t) for the upcoming round
  Vec betas() const;                // beta(t) for the upcoming round
  const Vec& alpha_sums() const { return alpha_sums_; }
  const Vec& cumulative_estimates() const { return cum_estimates_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const Vec& last_distribution() const { return last_p_; }
  const ftrl::SolveResult& last_solve() const { return last_solve_; }

  // JSON snapshot with fields: round, gamma, cumulative_estimates, hint,
  // counts, alpha_sums, betas, last_distribution, plus the config needed to
  // resume. from_state_json restores an equivalent policy mid-stream.
  std::string state_json() const;
  static BobwPolicy from_state_json(const std::string& json_text);

 private:
  PolicyConfig config_;
  double gamma_ = 0.0;
  std::int64_t round_ = 0;
  bool awaiting_update_ = false;
  Vec cum_estimates_;               // sum of estimates over past rounds
  Vec loss_sums_;                   // observed losses per arm (EmpiricalMean)
  Vec ewma_;                        // hint state (Ewma)
  std::vector<std::int64_t> counts_;
  Vec alpha_sums_;
  Vec last_p_;
  Vec pending_hint_;                // hint used by the pending round
  double warm_lambda_ = 0.0;
  bool has_warm_lambda_ = false;
  ftrl::SolveResult last_solve_;
};

}  // namespace bobw
