#pragma once
// Reference policies run next to the adaptive one: UCB1 and UCB-V with the
// lower-confidence rule on losses, Tsallis-INF (1/2-Tsallis potential) with
// importance-weighted or reduced-variance estimates, and a uniform control.

#include <cstdint>

#include "bobw/policy.hpp"

namespace bobw {

// Shared select/update alternation guard.
class AlternatingPolicy : public Policy {
 protected:
  void enter_select() {
    if (awaiting_update_) {
      fail(ErrorCode::StateError, "select called twice without an update");
    }
    awaiting_update_ = true;
  }
  void enter_update(int arm, double observed, int num_arms) {
    if (!awaiting_update_) {
      fail(ErrorCode::StateError, "update called before select");
    }
    if (arm < 0 || arm >= num_arms) {
      fail(ErrorCode::InvalidArgument, "arm index out of range");
    }
    validate_loss_value(observed);
    awaiting_update_ = false;
  }

 private:
  bool awaiting_update_ = false;
};

// UCB1, loss convention: after one forced pull per arm, play the arm
// minimizing mean_i - sqrt(2*log(t)/n_i). Ties go to the lowest index.
class Ucb1Policy : public AlternatingPolicy {
 public:
  explicit Ucb1Policy(int num_arms);
  const char* name() const override { return "ucb1"; }
  int num_arms() const override { return num_arms_; }
  Vec select() override;
  void update(int arm, double observed_loss) override;

 private:
  int num_arms_;
  std::int64_t round_ = 0;
  std::vector<std::int64_t> counts_;
  Vec mean_;
  int pending_arm_ = -1;
};

// UCB-V, loss convention: index is
//   mean_i - sqrt(2*zeta*var_i*log(t)/n_i) - 3*zeta*log(t)/n_i
// with the biased empirical variance. Default zeta = 1.2.
class UcbVPolicy : public AlternatingPolicy {
 public:
  explicit UcbVPolicy(int num_arms, double zeta = 1.2);
  const char* name() const override { return "ucbv"; }
  int num_arms() const override { return num_arms_; }
  Vec select() override;
  void update(int arm, double observed_loss) override;

  // Biased empirical variance of the observations on one arm (0 before the
  // first pull).
  double arm_variance(int arm) const;

 private:
  int num_arms_;
  double zeta_;
  std::int64_t round_ = 0;
  std::vector<std::int64_t> counts_;
  Vec mean_;
  Vec m2_;  // sum of squared deviations (Welford)
  int pending_arm_ = -1;
};

enum class TsallisEstimator { ImportanceWeighted, ReducedVariance };

// Tsallis-INF with the 1/2-Tsallis potential: round t plays
//   w(t) = argmin_w <w, Lhat(t-1)> - (4/eta_t) * sum_i sqrt(w_i)
// over the simplex, with the anytime learning rate eta_t = 2/sqrt(t). The
// importance-weighted estimator is lhat_i = 1[I=i]*loss_i/w_i; the
// reduced-variance one recenters at 1/2 where w_i >= eta_t^2:
//   lhat_i = B_i + 1[I=i]*(loss_i - B_i)/w_i,  B_i = (1/2)*1[w_i >= eta_t^2].
class TsallisInfPolicy : public AlternatingPolicy {
 public:
  TsallisInfPolicy(int num_arms, TsallisEstimator estimator);
  const char* name() const override;
  int num_arms() const override { return num_arms_; }
  Vec select() override;
  void update(int arm, double observed_loss) override;

  const Vec& cumulative_estimates() const { return cum_estimates_; }

 private:
  int num_arms_;
  TsallisEstimator estimator_;
  std::int64_t round_ = 0;
  Vec cum_estimates_;
  Vec last_w_;
  double last_eta_ = 0.0;
};

class UniformPolicy : public AlternatingPolicy {
 public:
  explicit UniformPolicy(int num_arms);
  const char* name() const override { return "uniform"; }
  int num_arms() const override { return num_arms_; }
  Vec select() override;
  void update(int arm, double observed_loss) override;

 private:
  int num_arms_;
};

}  // namespace bobw
