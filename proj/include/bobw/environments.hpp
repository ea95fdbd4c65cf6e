#pragma once
// Loss generators: i.i.d. stochastic arms, scripted and switching
// adversaries, and budgeted corruption on top of a stochastic base. All
// losses live in [0,1]^K. Generation for round t may read the realized
// history of earlier rounds (losses and played arms) but never the current
// round's distribution.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "bobw/core.hpp"

namespace bobw {

struct ArmDistribution {
  enum class Kind { Bernoulli, Beta, Discrete, Constant };

  Kind kind = Kind::Bernoulli;
  double mu = 0.5;       // Bernoulli mean / Constant value
  double alpha = 1.0;    // Beta parameters
  double beta = 1.0;
  Vec points;            // Discrete support (values in [0,1])
  Vec probs;             // Discrete probabilities (nonnegative, sum 1)

  static ArmDistribution bernoulli(double mu);
  static ArmDistribution beta_dist(double alpha, double beta);
  static ArmDistribution discrete(Vec points, Vec probs);
  static ArmDistribution constant(double value);

  void validate() const;      // ConfigError on bad parameters
  double mean() const;
  double variance() const;
  double sample(Rng& rng) const;
};

// Ground-truth description of a stochastic instance: exact means and
// variances per arm, the optimal arm, and the gaps.
struct TheoryInstance {
  Vec mu;
  Vec sigma_sq;
  int optimal_arm = 0;
  bool unique_optimal = true;

  double mu_star() const { return mu[static_cast<std::size_t>(optimal_arm)]; }
  double gap(int arm) const {
    return mu[static_cast<std::size_t>(arm)] - mu_star();
  }
  int num_arms() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

// Realized history visible to an adversary when generating round t.
struct History {
  const std::vector<Vec>* losses = nullptr;  // rounds 1..t-1
  const std::vector<int>* arms = nullptr;
};

// One round of generated losses. base differs from loss only under
// corruption; c_round is the corruption spent this round, max_i |loss-base|.
struct DrawnLosses {
  Vec loss;
  Vec base;
  double c_round = 0.0;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const char* name() const = 0;
  virtual int num_arms() const = 0;
  // Loss vector for round t (1-based).
  virtual DrawnLosses draw(std::int64_t t, const History& history, Rng& rng) = 0;
  // Exact instance parameters. Throws MissingGroundTruth when the
  // environment has no stationary description (adversarial generators).
  virtual TheoryInstance ground_truth() const;
};

class StochasticEnvironment : public Environment {
 public:
  explicit StochasticEnvironment(std::vector<ArmDistribution> arms);
  const char* name() const override { return "stochastic"; }
  int num_arms() const override { return static_cast<int>(arms_.size()); }
  DrawnLosses draw(std::int64_t t, const History& history, Rng& rng) override;
  TheoryInstance ground_truth() const override;

 private:
  std::vector<ArmDistribution> arms_;
};

// Fixed loss matrix, one row per round. Running past the last row is a
// DomainError.
class ScriptedEnvironment : public Environment {
 public:
  explicit ScriptedEnvironment(std::vector<Vec> rows);
  static ScriptedEnvironment from_csv(const std::string& path);
  const char* name() const override { return "scripted"; }
  int num_arms() const override;
  std::int64_t rounds() const { return static_cast<std::int64_t>(rows_.size()); }
  DrawnLosses draw(std::int64_t t, const History& history, Rng& rng) override;
  const std::vector<Vec>& rows() const { return rows_; }

 private:
  std::vector<Vec> rows_;
};

// Alternates between two stochastic instances in fixed-length blocks
// (rounds 1..block_len from the first instance, the next block from the
// second, and so on).
class StochasticallyConstrainedEnvironment : public Environment {
 public:
  StochasticallyConstrainedEnvironment(std::vector<ArmDistribution> arms_a,
                                       std::vector<ArmDistribution> arms_b,
                                       std::int64_t block_len);
  const char* name() const override { return "stochastically_constrained"; }
  int num_arms() const override { return static_cast<int>(arms_a_.size()); }
  DrawnLosses draw(std::int64_t t, const History& history, Rng& rng) override;

 private:
  std::vector<ArmDistribution> arms_a_;
  std::vector<ArmDistribution> arms_b_;
  std::int64_t block_len_;
};

// Deterministic switch: profile_a before switch_round, profile_b from
// switch_round on.
class WorstCaseSwitchEnvironment : public Environment {
 public:
  WorstCaseSwitchEnvironment(Vec profile_a, Vec profile_b,
                             std::int64_t switch_round);
  const char* name() const override { return "worst_case_switch"; }
  int num_arms() const override { return static_cast<int>(profile_a_.size()); }
  DrawnLosses draw(std::int64_t t, const History& history, Rng& rng) override;

 private:
  Vec profile_a_;
  Vec profile_b_;
  std::int64_t switch_round_;
};

enum class CorruptionStrategy {
  // From round 1 on, set the optimal arm's loss to 1 and the best
  // suboptimal arm's loss to 0, until the budget can no longer pay for a
  // full round's change.
  FlipOptimalPrefix,
  // Each round, with probability spike_rate, push one uniformly chosen
  // arm's loss to the far end (0 -> 1 side swap), budget permitting.
  RandomSpikes,
};

class CorruptedEnvironment : public Environment {
 public:
  CorruptedEnvironment(std::vector<ArmDistribution> base, double budget,
                       CorruptionStrategy strategy, double spike_rate = 0.05);
  const char* name() const override { return "corrupted"; }
  int num_arms() const override { return base_.num_arms(); }
  DrawnLosses draw(std::int64_t t, const History& history, Rng& rng) override;
  // Ground truth of the uncorrupted base instance.
  TheoryInstance ground_truth() const override;
  double budget() const { return budget_; }
  double spent() const { return spent_; }

 private:
  StochasticEnvironment base_;
  double budget_;
  CorruptionStrategy strategy_;
  double spike_rate_;
  double spent_ = 0.0;
  int optimal_arm_ = 0;
  int runner_up_ = 0;
};

}  // namespace bobw
