#include "bobw/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace bobw {

namespace {

void check_num_arms(int num_arms) {
  if (num_arms < 2) fail(ErrorCode::ConfigError, "num_arms must be at least 2");
}

Vec point_mass(int num_arms, int arm) {
  Vec w(static_cast<std::size_t>(num_arms), 0.0);
  w[static_cast<std::size_t>(arm)] = 1.0;
  return w;
}

}  // namespace

Ucb1Policy::Ucb1Policy(int num_arms) : num_arms_(num_arms) {
  check_num_arms(num_arms);
  counts_.assign(static_cast<std::size_t>(num_arms), 0);
  mean_.assign(static_cast<std::size_t>(num_arms), 0.0);
}

Vec Ucb1Policy::select() {
  enter_select();
  for (int i = 0; i < num_arms_; ++i) {
    if (counts_[static_cast<std::size_t>(i)] == 0) {
      pending_arm_ = i;
      return point_mass(num_arms_, i);
    }
  }
  const double t = static_cast<double>(round_ + 1);
  int best = 0;
  double best_index = 0.0;
  for (int i = 0; i < num_arms_; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double n = static_cast<double>(counts_[k]);
    const double index = mean_[k] - std::sqrt(2.0 * std::log(t) / n);
    if (i == 0 || index < best_index) {
      best = i;
      best_index = index;
    }
  }
  pending_arm_ = best;
  return point_mass(num_arms_, best);
}

void Ucb1Policy::update(int arm, double observed_loss) {
  enter_update(arm, observed_loss, num_arms_);
  const std::size_t k = static_cast<std::size_t>(arm);
  counts_[k] += 1;
  mean_[k] += (observed_loss - mean_[k]) / static_cast<double>(counts_[k]);
  round_ += 1;
  pending_arm_ = -1;
}

UcbVPolicy::UcbVPolicy(int num_arms, double zeta) : num_arms_(num_arms), zeta_(zeta) {
  check_num_arms(num_arms);
  if (!(zeta > 0.0)) fail(ErrorCode::ConfigError, "zeta must be positive");
  counts_.assign(static_cast<std::size_t>(num_arms), 0);
  mean_.assign(static_cast<std::size_t>(num_arms), 0.0);
  m2_.assign(static_cast<std::size_t>(num_arms), 0.0);
}

double UcbVPolicy::arm_variance(int arm) const {
  if (arm < 0 || arm >= num_arms_) {
    fail(ErrorCode::InvalidArgument, "arm index out of range");
  }
  const std::size_t k = static_cast<std::size_t>(arm);
  if (counts_[k] == 0) return 0.0;
  return m2_[k] / static_cast<double>(counts_[k]);
}

Vec UcbVPolicy::select() {
  enter_select();
  for (int i = 0; i < num_arms_; ++i) {
    if (counts_[static_cast<std::size_t>(i)] == 0) {
      pending_arm_ = i;
      return point_mass(num_arms_, i);
    }
  }
  const double logt = std::log(static_cast<double>(round_ + 1));
  int best = 0;
  double best_index = 0.0;
  for (int i = 0; i < num_arms_; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double n = static_cast<double>(counts_[k]);
    const double var = m2_[k] / n;
    const double index = mean_[k] - std::sqrt(2.0 * zeta_ * var * logt / n) -
                         3.0 * zeta_ * logt / n;
    if (i == 0 || index < best_index) {
      best = i;
      best_index = index;
    }
  }
  pending_arm_ = best;
  return point_mass(num_arms_, best);
}

void UcbVPolicy::update(int arm, double observed_loss) {
  enter_update(arm, observed_loss, num_arms_);
  const std::size_t k = static_cast<std::size_t>(arm);
  counts_[k] += 1;
  const double d = observed_loss - mean_[k];
  mean_[k] += d / static_cast<double>(counts_[k]);
  m2_[k] += d * (observed_loss - mean_[k]);
  round_ += 1;
  pending_arm_ = -1;
}

TsallisInfPolicy::TsallisInfPolicy(int num_arms, TsallisEstimator estimator)
    : num_arms_(num_arms), estimator_(estimator) {
  check_num_arms(num_arms);
  cum_estimates_.assign(static_cast<std::size_t>(num_arms), 0.0);
}

const char* TsallisInfPolicy::name() const {
  return estimator_ == TsallisEstimator::ImportanceWeighted ? "tsallis_iw"
                                                            : "tsallis_rv";
}

Vec TsallisInfPolicy::select() {
  enter_select();
  const std::size_t K = static_cast<std::size_t>(num_arms_);
  const double eta = 2.0 / std::sqrt(static_cast<double>(round_ + 1));
  const double lmin = *std::min_element(cum_estimates_.begin(), cum_estimates_.end());

  // w_i(lambda) = 4 / (eta * (Lhat_i + lambda))^2, strictly decreasing in
  // lambda on (-min Lhat, inf); bisect the normalization.
  auto weight_sum = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const double d = eta * (cum_estimates_[i] - lmin + lam);
      s += 4.0 / (d * d);
    }
    return s;
  };
  double lo = 1.0 / eta;  // the lmin term alone is 4 > 1 here
  double hi = 2.0 * std::sqrt(static_cast<double>(K)) / eta + 1.0;
  double w = 1.0;
  while (weight_sum(hi) > 1.0) {
    lo = hi;
    hi += w;
    w *= 2.0;
  }
  double lam = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;  // interval exhausted in doubles
    lam = mid;
    const double s = weight_sum(lam);
    if (s > 1.0) lo = lam;
    else hi = lam;
    if (std::abs(s - 1.0) <= 1e-13) break;
  }
  Vec weights(K);
  double total = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double d = eta * (cum_estimates_[i] - lmin + lam);
    weights[i] = 4.0 / (d * d);
    total += weights[i];
  }
  for (std::size_t i = 0; i < K; ++i) weights[i] /= total;
  last_w_ = weights;
  last_eta_ = eta;
  return weights;
}

void TsallisInfPolicy::update(int arm, double observed_loss) {
  enter_update(arm, observed_loss, num_arms_);
  const std::size_t K = static_cast<std::size_t>(num_arms_);
  if (last_w_.size() != K) {
    fail(ErrorCode::StateError, "update without a stored distribution");
  }
  const std::size_t a = static_cast<std::size_t>(arm);
  if (estimator_ == TsallisEstimator::ImportanceWeighted) {
    cum_estimates_[a] += observed_loss / last_w_[a];
  } else {
    const double eta_sq = last_eta_ * last_eta_;
    for (std::size_t i = 0; i < K; ++i) {
      const double b = (last_w_[i] >= eta_sq) ? 0.5 : 0.0;
      double est = b;
      if (i == a) est += (observed_loss - b) / last_w_[i];
      cum_estimates_[i] += est;
    }
  }
  round_ += 1;
}

UniformPolicy::UniformPolicy(int num_arms) : num_arms_(num_arms) {
  check_num_arms(num_arms);
}

Vec UniformPolicy::select() {
  enter_select();
  return Vec(static_cast<std::size_t>(num_arms_),
             1.0 / static_cast<double>(num_arms_));
}

void UniformPolicy::update(int arm, double observed_loss) {
  enter_update(arm, observed_loss, num_arms_);
}

}  // namespace bobw
