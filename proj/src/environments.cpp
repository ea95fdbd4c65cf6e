#include "bobw/environments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bobw {

ArmDistribution ArmDistribution::bernoulli(double mu) {
  ArmDistribution d;
  d.kind = Kind::Bernoulli;
  d.mu = mu;
  d.validate();
  return d;
}

ArmDistribution ArmDistribution::beta_dist(double alpha, double beta) {
  ArmDistribution d;
  d.kind = Kind::Beta;
  d.alpha = alpha;
  d.beta = beta;
  d.validate();
  return d;
}

ArmDistribution ArmDistribution::discrete(Vec points, Vec probs) {
  ArmDistribution d;
  d.kind = Kind::Discrete;
  d.points = std::move(points);
  d.probs = std::move(probs);
  d.validate();
  return d;
}

ArmDistribution ArmDistribution::constant(double value) {
  ArmDistribution d;
  d.kind = Kind::Constant;
  d.mu = value;
  d.validate();
  return d;
}

void ArmDistribution::validate() const {
  switch (kind) {
    case Kind::Bernoulli:
    case Kind::Constant:
      if (!(mu >= 0.0) || !(mu <= 1.0)) {
        fail(ErrorCode::ConfigError, "arm mean must lie in [0,1]");
      }
      break;
    case Kind::Beta:
      if (!(alpha > 0.0) || !(beta > 0.0)) {
        fail(ErrorCode::ConfigError, "beta parameters must be positive");
      }
      break;
    case Kind::Discrete: {
      if (points.empty() || points.size() != probs.size()) {
        fail(ErrorCode::ConfigError, "discrete arm needs matching points/probs");
      }
      double psum = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] >= 0.0) || !(points[i] <= 1.0)) {
          fail(ErrorCode::ConfigError, "discrete support must lie in [0,1]");
        }
        if (!(probs[i] >= 0.0)) {
          fail(ErrorCode::ConfigError, "discrete probabilities must be >= 0");
        }
        psum += probs[i];
      }
      if (std::abs(psum - 1.0) > 1e-9) {
        fail(ErrorCode::ConfigError, "discrete probabilities must sum to 1");
      }
      break;
    }
  }
}

double ArmDistribution::mean() const {
  switch (kind) {
    case Kind::Bernoulli:
    case Kind::Constant:
      return mu;
    case Kind::Beta:
      return alpha / (alpha + beta);
    case Kind::Discrete: {
      double m = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) m += probs[i] * points[i];
      return m;
    }
  }
  return 0.0;
}

double ArmDistribution::variance() const {
  switch (kind) {
    case Kind::Bernoulli:
      return mu * (1.0 - mu);
    case Kind::Constant:
      return 0.0;
    case Kind::Beta: {
      const double s = alpha + beta;
      return alpha * beta / (s * s * (s + 1.0));
    }
    case Kind::Discrete: {
      const double m = mean();
      double v = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        v += probs[i] * (points[i] - m) * (points[i] - m);
      }
      return std::max(0.0, v);
    }
  }
  return 0.0;
}

double ArmDistribution::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Bernoulli:
      return rng.uniform01() < mu ? 1.0 : 0.0;
    case Kind::Constant:
      return mu;
    case Kind::Beta:
      return std::min(1.0, std::max(0.0, rng.beta(alpha, beta)));
    case Kind::Discrete: {
      const double u = rng.uniform01();
      double cum = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        cum += probs[i];
        if (u < cum) return points[i];
      }
      return points.back();
    }
  }
  return 0.0;
}

void TheoryInstance::validate() const {
  if (mu.size() < 2 || mu.size() != sigma_sq.size()) {
    fail(ErrorCode::ConfigError, "instance needs matched mu/sigma_sq, K >= 2");
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0) || !(mu[i] <= 1.0)) {
      fail(ErrorCode::ConfigError, "means must lie in [0,1]");
    }
    const double cap = mu[i] * (1.0 - mu[i]);
    if (!(sigma_sq[i] >= 0.0) || sigma_sq[i] > cap + 1e-12) {
      fail(ErrorCode::ConfigError,
           "variance must lie in [0, mu*(1-mu)] for [0,1] losses");
    }
  }
  if (optimal_arm < 0 || optimal_arm >= num_arms()) {
    fail(ErrorCode::ConfigError, "optimal_arm out of range");
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] < mu_star()) {
      fail(ErrorCode::ConfigError, "optimal_arm does not attain the smallest mean");
    }
  }
}

TheoryInstance Environment::ground_truth() const {
  fail(ErrorCode::MissingGroundTruth,
       std::string(name()) + " has no stationary ground truth");
}

namespace {

TheoryInstance instance_from_arms(const std::vector<ArmDistribution>& arms) {
  TheoryInstance gt;
  gt.mu.reserve(arms.size());
  gt.sigma_sq.reserve(arms.size());
  for (const auto& a : arms) {
    gt.mu.push_back(a.mean());
    gt.sigma_sq.push_back(a.variance());
  }
  gt.optimal_arm = static_cast<int>(
      std::min_element(gt.mu.begin(), gt.mu.end()) - gt.mu.begin());
  gt.unique_optimal =
      std::count(gt.mu.begin(), gt.mu.end(), gt.mu_star()) == 1;
  gt.validate();
  return gt;
}

void check_arms(const std::vector<ArmDistribution>& arms) {
  if (arms.size() < 2) {
    fail(ErrorCode::ConfigError, "environment needs at least 2 arms");
  }
  for (const auto& a : arms) a.validate();
}

}  // namespace

StochasticEnvironment::StochasticEnvironment(std::vector<ArmDistribution> arms)
    : arms_(std::move(arms)) {
  check_arms(arms_);
}

DrawnLosses StochasticEnvironment::draw(std::int64_t, const History&, Rng& rng) {
  DrawnLosses out;
  out.loss.resize(arms_.size());
  for (std::size_t i = 0; i < arms_.size(); ++i) out.loss[i] = arms_[i].sample(rng);
  out.base = out.loss;
  return out;
}

TheoryInstance StochasticEnvironment::ground_truth() const {
  return instance_from_arms(arms_);
}

ScriptedEnvironment::ScriptedEnvironment(std::vector<Vec> rows)
    : rows_(std::move(rows)) {
  if (rows_.empty()) fail(ErrorCode::ConfigError, "scripted matrix is empty");
  const std::size_t K = rows_.front().size();
  if (K < 2) fail(ErrorCode::ConfigError, "scripted matrix needs K >= 2 columns");
  for (const auto& r : rows_) {
    if (r.size() != K) {
      fail(ErrorCode::ConfigError, "scripted matrix rows differ in width");
    }
    validate_loss_vector(r);
  }
}

ScriptedEnvironment ScriptedEnvironment::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open scripted CSV: " + path);
  std::vector<Vec> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    Vec row;
    std::stringstream ss(line);
    std::string cell;
    bool parse_ok = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        row.push_back(v);
        (void)used;
      } catch (const std::exception&) {
        parse_ok = false;
        break;
      }
    }
    if (!parse_ok) {
      if (first) {
        first = false;  // tolerate one header line
        continue;
      }
      fail(ErrorCode::ConfigError, "unparseable CSV line: " + line);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return ScriptedEnvironment(std::move(rows));
}

int ScriptedEnvironment::num_arms() const {
  return static_cast<int>(rows_.front().size());
}

DrawnLosses ScriptedEnvironment::draw(std::int64_t t, const History&, Rng&) {
  if (t < 1 || t > rounds()) {
    fail(ErrorCode::DomainError,
         "scripted environment has " + std::to_string(rounds()) +
             " rounds, asked for round " + std::to_string(t));
  }
  DrawnLosses out;
  out.loss = rows_[static_cast<std::size_t>(t - 1)];
  out.base = out.loss;
  return out;
}

StochasticallyConstrainedEnvironment::StochasticallyConstrainedEnvironment(
    std::vector<ArmDistribution> arms_a, std::vector<ArmDistribution> arms_b,
    std::int64_t block_len)
    : arms_a_(std::move(arms_a)),
      arms_b_(std::move(arms_b)),
      block_len_(block_len) {
  check_arms(arms_a_);
  check_arms(arms_b_);
  if (arms_a_.size() != arms_b_.size()) {
    fail(ErrorCode::ConfigError, "both instances need the same arm count");
  }
  if (block_len_ < 1) fail(ErrorCode::ConfigError, "block_len must be >= 1");
}

DrawnLosses StochasticallyConstrainedEnvironment::draw(std::int64_t t,
                                                       const History&,
                                                       Rng& rng) {
  const bool use_a = (((t - 1) / block_len_) % 2) == 0;
  const auto& arms = use_a ? arms_a_ : arms_b_;
  DrawnLosses out;
  out.loss.resize(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) out.loss[i] = arms[i].sample(rng);
  out.base = out.loss;
  return out;
}

WorstCaseSwitchEnvironment::WorstCaseSwitchEnvironment(Vec profile_a,
                                                       Vec profile_b,
                                                       std::int64_t switch_round)
    : profile_a_(std::move(profile_a)),
      profile_b_(std::move(profile_b)),
      switch_round_(switch_round) {
  if (profile_a_.size() < 2 || profile_a_.size() != profile_b_.size()) {
    fail(ErrorCode::ConfigError, "profiles need matching size, K >= 2");
  }
  validate_loss_vector(profile_a_);
  validate_loss_vector(profile_b_);
  if (switch_round_ < 1) fail(ErrorCode::ConfigError, "switch_round must be >= 1");
}

DrawnLosses WorstCaseSwitchEnvironment::draw(std::int64_t t, const History&,
                                             Rng&) {
  DrawnLosses out;
  out.loss = (t < switch_round_) ? profile_a_ : profile_b_;
  out.base = out.loss;
  return out;
}

CorruptedEnvironment::CorruptedEnvironment(std::vector<ArmDistribution> base,
                                           double budget,
                                           CorruptionStrategy strategy,
                                           double spike_rate)
    : base_(std::move(base)),
      budget_(budget),
      strategy_(strategy),
      spike_rate_(spike_rate) {
  if (!(budget >= 0.0)) fail(ErrorCode::ConfigError, "budget must be >= 0");
  if (strategy == CorruptionStrategy::RandomSpikes &&
      (!(spike_rate > 0.0) || spike_rate > 1.0)) {
    fail(ErrorCode::ConfigError, "spike_rate must lie in (0,1]");
  }
  const TheoryInstance gt = base_.ground_truth();
  optimal_arm_ = gt.optimal_arm;
  runner_up_ = -1;
  for (int i = 0; i < gt.num_arms(); ++i) {
    if (i == optimal_arm_) continue;
    if (runner_up_ < 0 ||
        gt.mu[static_cast<std::size_t>(i)] <
            gt.mu[static_cast<std::size_t>(runner_up_)]) {
      runner_up_ = i;
    }
  }
}

DrawnLosses CorruptedEnvironment::draw(std::int64_t t, const History& history,
                                       Rng& rng) {
  DrawnLosses out = base_.draw(t, history, rng);
  switch (strategy_) {
    case CorruptionStrategy::FlipOptimalPrefix: {
      const std::size_t opt = static_cast<std::size_t>(optimal_arm_);
      const std::size_t run = static_cast<std::size_t>(runner_up_);
      const double cost =
          std::max(1.0 - out.base[opt], out.base[run]);
      if (spent_ + cost <= budget_) {
        out.loss[opt] = 1.0;
        out.loss[run] = 0.0;
        out.c_round = cost;
        spent_ += cost;
      }
      break;
    }
    case CorruptionStrategy::RandomSpikes: {
      if (rng.uniform01() < spike_rate_) {
        const int K = num_arms();
        const std::size_t j = static_cast<std::size_t>(
            std::min<int>(K - 1, static_cast<int>(rng.uniform01() *
                                                  static_cast<double>(K))));
        const double flipped = out.base[j] < 0.5 ? 1.0 : 0.0;
        const double cost = std::abs(flipped - out.base[j]);
        if (spent_ + cost <= budget_) {
          out.loss[j] = flipped;
          out.c_round = cost;
          spent_ += cost;
        }
      }
      break;
    }
  }
  return out;
}

TheoryInstance CorruptedEnvironment::ground_truth() const {
  return base_.ground_truth();
}

}  // namespace bobw
