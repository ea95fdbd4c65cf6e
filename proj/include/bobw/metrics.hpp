#pragma once
// Regret trajectories and the data-dependent quantities the bounds are
// stated in: the best cumulative loss L*, the per-round variation proxy
// Q_infinity (reported as an upper bound from a convex minimization), the
// path length V_1, the realized corruption, and per-arm pull counts.

#include <cstdint>
#include <vector>

#include "bobw/environments.hpp"

namespace bobw {

// Everything recorded about one trial.
struct TrialRecord {
  std::vector<Vec> losses;       // what the learner faced (post-corruption)
  std::vector<Vec> base_losses;  // pre-corruption; equal to losses when clean
  std::vector<int> arms;
  std::vector<double> observed;
  std::uint64_t seed = 0;

  std::int64_t rounds() const { return static_cast<std::int64_t>(losses.size()); }
  int num_arms() const {
    return losses.empty() ? 0 : static_cast<int>(losses.front().size());
  }
  void validate() const;
};

enum class RegretMode {
  // Cumulative gap of the played arms, sum_s Delta_{I(s)}; needs ground
  // truth. The default for stochastic and corrupted runs.
  PseudoStochastic,
  // Cumulative loss difference against the best fixed arm in hindsight.
  Realized,
};

// Per-round cumulative regret, length T.
Vec regret_trajectory(const TrialRecord& trial, RegretMode mode,
                      const TheoryInstance* ground_truth = nullptr);

// Smallest cumulative loss over arms: min_i sum_t losses[t][i].
double l_star(const std::vector<Vec>& losses);

// Total path length sum_t ||losses[t+1] - losses[t]||_1.
double v1(const std::vector<Vec>& losses);

// Upper bound on min over lbar in [0,1]^K of sum_t max_i (losses[t][i] -
// lbar_i)^2, by projected subgradient descent from three starts
// (coordinate-wise mean, coordinate-wise midrange, all 1/2). The result is
// the objective at a feasible point, hence always a valid upper bound; tol
// controls the stopping rule.
struct QInftyResult {
  double value = 0.0;
  Vec lbar;
  int iterations = 0;
};
QInftyResult q_infty_upper(const std::vector<Vec>& losses, double tol = 1e-7,
                           int max_iterations = 2000);

// Realized corruption sum_t max_i |losses[t][i] - base_losses[t][i]|.
double corruption_realized(const TrialRecord& trial);

std::vector<std::int64_t> pull_counts(const TrialRecord& trial);

struct DataQuantities {
  double l_star = 0.0;
  double q_infty_upper = 0.0;
  double v_1 = 0.0;
  double c_realized = 0.0;
  std::vector<std::int64_t> pulls;
};
DataQuantities data_quantities(const TrialRecord& trial);

// Across-trial mean and standard error (sample stddev / sqrt(n), ddof 1;
// se is 0 with a single trial). Series must share a length.
class TrajectoryAccumulator {
 public:
  void add(const Vec& series);
  std::int64_t count() const { return n_; }
  Vec mean() const;
  Vec standard_error() const;

 private:
  std::int64_t n_ = 0;
  Vec sum_;
  Vec sum_sq_;
};

struct ScalarStats {
  double mean = 0.0;
  double se = 0.0;
  double min = 0.0;
  double max = 0.0;
};
ScalarStats scalar_stats(const Vec& values);

}  // namespace bobw
