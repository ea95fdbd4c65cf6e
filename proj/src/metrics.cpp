#include "bobw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bobw {

void TrialRecord::validate() const {
  const std::size_t T = losses.size();
  if (T == 0) fail(ErrorCode::InvalidArgument, "empty trial record");
  if (base_losses.size() != T || arms.size() != T || observed.size() != T) {
    fail(ErrorCode::InvalidArgument, "trial record arrays differ in length");
  }
  const std::size_t K = losses.front().size();
  if (K < 2) fail(ErrorCode::InvalidArgument, "trial record needs K >= 2");
  for (std::size_t t = 0; t < T; ++t) {
    if (losses[t].size() != K || base_losses[t].size() != K) {
      fail(ErrorCode::InvalidArgument, "trial record rows differ in width");
    }
    if (arms[t] < 0 || static_cast<std::size_t>(arms[t]) >= K) {
      fail(ErrorCode::InvalidArgument, "played arm out of range in record");
    }
  }
}

Vec regret_trajectory(const TrialRecord& trial, RegretMode mode,
                      const TheoryInstance* ground_truth) {
  trial.validate();
  const std::size_t T = trial.losses.size();
  Vec out(T);
  if (mode == RegretMode::PseudoStochastic) {
    if (ground_truth == nullptr) {
      fail(ErrorCode::InvalidArgument,
           "pseudo-regret needs the instance ground truth");
    }
    if (ground_truth->num_arms() != trial.num_arms()) {
      fail(ErrorCode::InvalidArgument, "ground truth arm count mismatch");
    }
    double cum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      cum += ground_truth->gap(trial.arms[t]);
      out[t] = cum;
    }
  } else {
    // Best fixed arm in hindsight over the full horizon.
    const std::size_t K = trial.losses.front().size();
    Vec totals(K, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < K; ++i) totals[i] += trial.losses[t][i];
    }
    const std::size_t best = static_cast<std::size_t>(
        std::min_element(totals.begin(), totals.end()) - totals.begin());
    double cum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      cum += trial.losses[t][static_cast<std::size_t>(trial.arms[t])] -
             trial.losses[t][best];
      out[t] = cum;
    }
  }
  return out;
}

double l_star(const std::vector<Vec>& losses) {
  if (losses.empty()) fail(ErrorCode::InvalidArgument, "empty loss sequence");
  const std::size_t K = losses.front().size();
  Vec totals(K, 0.0);
  for (const auto& row : losses) {
    for (std::size_t i = 0; i < K; ++i) totals[i] += row[i];
  }
  return *std::min_element(totals.begin(), totals.end());
}

double v1(const std::vector<Vec>& losses) {
  if (losses.empty()) fail(ErrorCode::InvalidArgument, "empty loss sequence");
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < losses.size(); ++t) {
    for (std::size_t i = 0; i < losses[t].size(); ++i) {
      total += std::abs(losses[t + 1][i] - losses[t][i]);
    }
  }
  return total;
}

namespace {

double q_objective(const std::vector<Vec>& losses, const Vec& lbar,
                   std::vector<std::size_t>* argmax_out = nullptr) {
  double total = 0.0;
  if (argmax_out) argmax_out->resize(losses.size());
  for (std::size_t t = 0; t < losses.size(); ++t) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < lbar.size(); ++i) {
      const double d = losses[t][i] - lbar[i];
      const double sq = d * d;
      if (sq > best) {
        best = sq;
        best_i = i;
      }
    }
    total += best;
    if (argmax_out) (*argmax_out)[t] = best_i;
  }
  return total;
}

}  // namespace

QInftyResult q_infty_upper(const std::vector<Vec>& losses, double tol,
                           int max_iterations) {
  if (losses.empty()) fail(ErrorCode::InvalidArgument, "empty loss sequence");
  const std::size_t K = losses.front().size();
  const std::size_t T = losses.size();

  Vec mean_start(K, 0.0);
  Vec lo(K, std::numeric_limits<double>::infinity());
  Vec hi(K, -std::numeric_limits<double>::infinity());
  for (const auto& row : losses) {
    for (std::size_t i = 0; i < K; ++i) {
      mean_start[i] += row[i];
      lo[i] = std::min(lo[i], row[i]);
      hi[i] = std::max(hi[i], row[i]);
    }
  }
  Vec mid_start(K);
  for (std::size_t i = 0; i < K; ++i) {
    mean_start[i] /= static_cast<double>(T);
    mid_start[i] = 0.5 * (lo[i] + hi[i]);
  }
  const std::vector<Vec> starts = {mean_start, mid_start, Vec(K, 0.5)};

  QInftyResult best;
  best.value = std::numeric_limits<double>::infinity();
  int total_iters = 0;
  std::vector<std::size_t> argmax;
  for (const Vec& start : starts) {
    Vec x = start;
    double fx = q_objective(losses, x, &argmax);
    double local_best = fx;
    Vec local_arg = x;
    int stale = 0;
    for (int k = 1; k <= max_iterations; ++k) {
      // Subgradient: each round contributes -2*(loss - lbar) on its argmax
      // coordinate.
      Vec g(K, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t i = argmax[t];
        g[i] += -2.0 * (losses[t][i] - x[i]);
      }
      double norm = 0.0;
      for (double v : g) norm += v * v;
      norm = std::sqrt(norm);
      ++total_iters;
      if (norm <= 1e-15) break;  // stationary
      const double step = 0.5 / (norm * std::sqrt(static_cast<double>(k)));
      for (std::size_t i = 0; i < K; ++i) {
        x[i] = std::min(1.0, std::max(0.0, x[i] - step * g[i]));
      }
      fx = q_objective(losses, x, &argmax);
      if (fx < local_best - tol * std::max(1.0, std::abs(local_best))) {
        local_best = fx;
        local_arg = x;
        stale = 0;
      } else {
        if (fx < local_best) {
          local_best = fx;
          local_arg = x;
        }
        if (++stale >= 40) break;  // no meaningful progress
      }
    }
    if (local_best < best.value) {
      best.value = local_best;
      best.lbar = local_arg;
    }
  }
  best.iterations = total_iters;
  return best;
}

double corruption_realized(const TrialRecord& trial) {
  trial.validate();
  double total = 0.0;
  for (std::size_t t = 0; t < trial.losses.size(); ++t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < trial.losses[t].size(); ++i) {
      worst = std::max(worst,
                       std::abs(trial.losses[t][i] - trial.base_losses[t][i]));
    }
    total += worst;
  }
  return total;
}

std::vector<std::int64_t> pull_counts(const TrialRecord& trial) {
  trial.validate();
  std::vector<std::int64_t> counts(
      static_cast<std::size_t>(trial.num_arms()), 0);
  for (int arm : trial.arms) counts[static_cast<std::size_t>(arm)] += 1;
  return counts;
}

DataQuantities data_quantities(const TrialRecord& trial) {
  trial.validate();
  DataQuantities q;
  q.l_star = l_star(trial.losses);
  q.q_infty_upper = q_infty_upper(trial.losses).value;
  q.v_1 = v1(trial.losses);
  q.c_realized = corruption_realized(trial);
  q.pulls = pull_counts(trial);
  return q;
}

void TrajectoryAccumulator::add(const Vec& series) {
  if (n_ == 0) {
    sum_.assign(series.size(), 0.0);
    sum_sq_.assign(series.size(), 0.0);
  }
  if (series.size() != sum_.size()) {
    fail(ErrorCode::InvalidArgument, "trajectory lengths differ");
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum_[i] += series[i];
    sum_sq_[i] += series[i] * series[i];
  }
  n_ += 1;
}

Vec TrajectoryAccumulator::mean() const {
  if (n_ == 0) fail(ErrorCode::StateError, "no trajectories accumulated");
  Vec m(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    m[i] = sum_[i] / static_cast<double>(n_);
  }
  return m;
}

Vec TrajectoryAccumulator::standard_error() const {
  if (n_ == 0) fail(ErrorCode::StateError, "no trajectories accumulated");
  Vec se(sum_.size(), 0.0);
  if (n_ < 2) return se;
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    const double mean = sum_[i] / n;
    double var = (sum_sq_[i] - n * mean * mean) / (n - 1.0);
    var = std::max(0.0, var);
    se[i] = std::sqrt(var / n);
  }
  return se;
}

ScalarStats scalar_stats(const Vec& values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "no values");
  ScalarStats s;
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  const double n = static_cast<double>(values.size());
  s.mean = sum / n;
  if (values.size() >= 2) {
    double var = (sum_sq - n * s.mean * s.mean) / (n - 1.0);
    s.se = std::sqrt(std::max(0.0, var) / n);
  }
  return s;
}

}  // namespace bobw
