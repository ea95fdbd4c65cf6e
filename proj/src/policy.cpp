#include "bobw/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace bobw {

using nlohmann::json;

void PolicyConfig::validate() const {
  if (num_arms < 2) {
    fail(ErrorCode::ConfigError, "num_arms must be at least 2");
  }
  const std::int64_t min_horizon =
      std::max<std::int64_t>(55, static_cast<std::int64_t>(num_arms));
  if (horizon < min_horizon) {
    std::ostringstream os;
    os << "horizon " << horizon << " below minimum " << min_horizon
       << " (tuning assumes T >= max(55, K))";
    fail(ErrorCode::ConfigError, os.str());
  }
  if (!(epsilon > 0.0) || epsilon > 0.5) {
    fail(ErrorCode::ConfigError, "epsilon must lie in (0, 1/2]");
  }
  if (hint_mode == HintMode::Ewma &&
      (!(ewma_eta > 0.0) || !(ewma_eta < 0.5))) {
    fail(ErrorCode::ConfigError, "ewma_eta must lie in (0, 1/2)");
  }
  if (!(solver.tol > 0.0)) {
    fail(ErrorCode::ConfigError, "solver tolerance must be positive");
  }
}

Vec estimate_loss(const Vec& p, const Vec& hint, int arm, double observed) {
  if (p.size() != hint.size()) {
    fail(ErrorCode::InvalidArgument, "p and hint sizes differ");
  }
  if (arm < 0 || static_cast<std::size_t>(arm) >= p.size()) {
    fail(ErrorCode::InvalidArgument, "arm index out of range");
  }
  validate_loss_value(observed);
  if (!(p[arm] > 0.0)) {
    fail(ErrorCode::DomainError, "played arm must have positive probability");
  }
  Vec est = hint;
  est[arm] += (observed - hint[arm]) / p[arm];
  return est;
}

double alpha_increment(double observed, double hint_arm, double p_arm,
                       double gamma) {
  validate_loss_value(observed);
  if (!(hint_arm >= 0.0) || !(hint_arm <= 1.0)) {
    fail(ErrorCode::DomainError, "hint must lie in [0,1]");
  }
  if (!(p_arm > 0.0) || !(p_arm < 1.0)) {
    fail(ErrorCode::DomainError, "p_arm must lie in (0,1)");
  }
  if (!(gamma > 0.0)) fail(ErrorCode::DomainError, "gamma must be positive");
  const double err = observed - hint_arm;
  const double clamp =
      std::min(1.0, 2.0 * (1.0 - p_arm) / (p_arm * p_arm * gamma));
  return err * err * clamp;
}

BobwPolicy::BobwPolicy(PolicyConfig config) : config_(config) {
  config_.validate();
  const std::size_t K = static_cast<std::size_t>(config_.num_arms);
  gamma_ = std::log(static_cast<double>(config_.horizon));
  cum_estimates_.assign(K, 0.0);
  loss_sums_.assign(K, 0.0);
  ewma_.assign(K, 0.5);
  counts_.assign(K, 0);
  alpha_sums_.assign(K, 0.0);
  last_solve_.p.clear();
}

const char* BobwPolicy::name() const { return "bobw"; }

Vec BobwPolicy::hint() const {
  const std::size_t K = static_cast<std::size_t>(config_.num_arms);
  Vec m(K);
  for (std::size_t i = 0; i < K; ++i) {
    if (config_.hint_mode == HintMode::EmpiricalMean) {
      m[i] = (0.5 + loss_sums_[i]) / (1.0 + static_cast<double>(counts_[i]));
    } else {
      m[i] = ewma_[i];
    }
  }
  return m;
}

Vec BobwPolicy::betas() const {
  const double b0 = beta0();
  Vec b(alpha_sums_.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = std::sqrt(b0 * b0 + alpha_sums_[i] / gamma_);
  }
  return b;
}

Vec BobwPolicy::select() {
  if (awaiting_update_) {
    fail(ErrorCode::StateError, "select called twice without an update");
  }
  pending_hint_ = hint();
  const Vec b = betas();
  Vec target(cum_estimates_.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = cum_estimates_[i] + pending_hint_[i];
  }
  last_solve_ = ftrl::solve_oftrl(target, b, gamma_, config_.solver,
                                  has_warm_lambda_ ? &warm_lambda_ : nullptr);
  warm_lambda_ = last_solve_.lambda;
  has_warm_lambda_ = true;
  last_p_ = last_solve_.p;
  validate_simplex(last_p_);
  awaiting_update_ = true;
  return last_p_;
}

void BobwPolicy::update(int arm, double observed_loss) {
  if (!awaiting_update_) {
    fail(ErrorCode::StateError, "update called before select");
  }
  if (arm < 0 || arm >= config_.num_arms) {
    fail(ErrorCode::InvalidArgument, "arm index out of range");
  }
  validate_loss_value(observed_loss);

  const Vec est = estimate_loss(last_p_, pending_hint_, arm, observed_loss);
  for (std::size_t i = 0; i < cum_estimates_.size(); ++i) {
    cum_estimates_[i] += est[i];
  }
  alpha_sums_[arm] += alpha_increment(observed_loss, pending_hint_[arm],
                                      last_p_[arm], gamma_);
  if (config_.hint_mode == HintMode::EmpiricalMean) {
    loss_sums_[arm] += observed_loss;
  } else {
    ewma_[arm] =
        (1.0 - config_.ewma_eta) * ewma_[arm] + config_.ewma_eta * observed_loss;
  }
  counts_[arm] += 1;
  round_ += 1;
  awaiting_update_ = false;
}

std::string BobwPolicy::state_json() const {
  if (awaiting_update_) {
    fail(ErrorCode::StateError, "snapshot only between rounds");
  }
  json j;
  j["round"] = round_;
  j["gamma"] = gamma_;
  j["cumulative_estimates"] = cum_estimates_;
  j["hint"] = hint();
  j["counts"] = counts_;
  j["alpha_sums"] = alpha_sums_;
  j["betas"] = betas();
  j["last_distribution"] = last_p_;
  j["warm_lambda"] = has_warm_lambda_ ? json(warm_lambda_) : json();
  j["config"] = {
      {"num_arms", config_.num_arms},
      {"horizon", config_.horizon},
      {"epsilon", config_.epsilon},
      {"hint_mode",
       config_.hint_mode == HintMode::EmpiricalMean ? "empirical_mean" : "ewma"},
      {"ewma_eta", config_.ewma_eta},
  };
  return j.dump(2);
}

BobwPolicy BobwPolicy::from_state_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad state JSON: ") + e.what());
  }
  try {
    PolicyConfig cfg;
    const json& jc = j.at("config");
    cfg.num_arms = jc.at("num_arms").get<int>();
    cfg.horizon = jc.at("horizon").get<std::int64_t>();
    cfg.epsilon = jc.at("epsilon").get<double>();
    const std::string mode = jc.at("hint_mode").get<std::string>();
    if (mode == "empirical_mean") cfg.hint_mode = HintMode::EmpiricalMean;
    else if (mode == "ewma") cfg.hint_mode = HintMode::Ewma;
    else fail(ErrorCode::ConfigError, "unknown hint_mode: " + mode);
    cfg.ewma_eta = jc.at("ewma_eta").get<double>();

    BobwPolicy policy(cfg);
    policy.round_ = j.at("round").get<std::int64_t>();
    policy.cum_estimates_ = j.at("cumulative_estimates").get<Vec>();
    policy.counts_ = j.at("counts").get<std::vector<std::int64_t>>();
    policy.alpha_sums_ = j.at("alpha_sums").get<Vec>();
    policy.last_p_ = j.at("last_distribution").get<Vec>();
    const Vec m = j.at("hint").get<Vec>();
    const std::size_t K = static_cast<std::size_t>(cfg.num_arms);
    if (policy.cum_estimates_.size() != K || policy.counts_.size() != K ||
        policy.alpha_sums_.size() != K || m.size() != K) {
      fail(ErrorCode::ConfigError, "state vector sizes do not match num_arms");
    }
    // The hint determines the internal sums: EmpiricalMean stores running
    // loss sums, Ewma stores the mean itself.
    for (std::size_t i = 0; i < K; ++i) {
      if (cfg.hint_mode == HintMode::EmpiricalMean) {
        policy.loss_sums_[i] =
            m[i] * (1.0 + static_cast<double>(policy.counts_[i])) - 0.5;
      } else {
        policy.ewma_[i] = m[i];
      }
    }
    if (j.contains("warm_lambda") && !j.at("warm_lambda").is_null()) {
      policy.warm_lambda_ = j.at("warm_lambda").get<double>();
      policy.has_warm_lambda_ = true;
    }
    return policy;
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad state JSON: ") + e.what());
  }
}

}  // namespace bobw
