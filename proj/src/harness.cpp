#include "bobw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "bobw/baselines.hpp"
#include "bobw/ftrl.hpp"
#include "bobw/theory.hpp"
#include "bobw/version.hpp"

namespace bobw::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& msg) {
  fail(ErrorCode::ConfigError, msg);
}

const json* find_field(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

double req_num(const json& j, const char* key) {
  const json* f = find_field(j, key);
  if (!f || !f->is_number()) {
    config_fail(std::string("missing or non-numeric field '") + key + "'");
  }
  return f->get<double>();
}

double num_or(const json& j, const char* key, double def) {
  const json* f = find_field(j, key);
  if (!f) return def;
  if (!f->is_number()) {
    config_fail(std::string("field '") + key + "' must be a number");
  }
  return f->get<double>();
}

std::int64_t req_int(const json& j, const char* key) {
  const json* f = find_field(j, key);
  if (!f || !f->is_number_integer()) {
    config_fail(std::string("missing or non-integer field '") + key + "'");
  }
  return f->get<std::int64_t>();
}

std::int64_t int_or(const json& j, const char* key, std::int64_t def) {
  const json* f = find_field(j, key);
  if (!f) return def;
  if (!f->is_number_integer()) {
    config_fail(std::string("field '") + key + "' must be an integer");
  }
  return f->get<std::int64_t>();
}

std::string req_str(const json& j, const char* key) {
  const json* f = find_field(j, key);
  if (!f || !f->is_string()) {
    config_fail(std::string("missing or non-string field '") + key + "'");
  }
  return f->get<std::string>();
}

std::string str_or(const json& j, const char* key, const std::string& def) {
  const json* f = find_field(j, key);
  if (!f) return def;
  if (!f->is_string()) {
    config_fail(std::string("field '") + key + "' must be a string");
  }
  return f->get<std::string>();
}

bool bool_or(const json& j, const char* key, bool def) {
  const json* f = find_field(j, key);
  if (!f) return def;
  if (!f->is_boolean()) {
    config_fail(std::string("field '") + key + "' must be a boolean");
  }
  return f->get<bool>();
}

const json& req_obj(const json& j, const char* key) {
  const json* f = find_field(j, key);
  if (!f || !f->is_object()) {
    config_fail(std::string("missing object field '") + key + "'");
  }
  return *f;
}

Vec vec_field(const json& j, const char* key) {
  const json* f = find_field(j, key);
  if (!f || !f->is_array()) {
    config_fail(std::string("missing array field '") + key + "'");
  }
  Vec out;
  out.reserve(f->size());
  for (const auto& e : *f) {
    if (!e.is_number()) {
      config_fail(std::string("array '") + key + "' must hold numbers only");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::IoError, "cannot open for writing: " + path.string());
  }
  out << content;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "short write: " + path.string());
}

json stats_json(const ScalarStats& s) {
  return json{{"mean", s.mean}, {"se", s.se}, {"min", s.min}, {"max", s.max}};
}

json report_json(const theory::BoundReport& r) {
  json inputs = json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = v;
  return json{{"formula_id", r.formula_id},
              {"value", r.value},
              {"per_arm", r.per_arm},
              {"inputs", inputs},
              {"notes", r.notes}};
}

std::vector<ArmDistribution> arms_from_json(const json& spec, const char* key) {
  const json* f = find_field(spec, key);
  if (!f || !f->is_array() || f->empty()) {
    config_fail(std::string("missing non-empty arms array '") + key + "'");
  }
  std::vector<ArmDistribution> arms;
  arms.reserve(f->size());
  for (const auto& a : *f) {
    const std::string kind = req_str(a, "kind");
    if (kind == "bernoulli") {
      arms.push_back(ArmDistribution::bernoulli(req_num(a, "mu")));
    } else if (kind == "beta") {
      arms.push_back(
          ArmDistribution::beta_dist(req_num(a, "alpha"), req_num(a, "beta")));
    } else if (kind == "discrete") {
      arms.push_back(ArmDistribution::discrete(vec_field(a, "points"),
                                               vec_field(a, "probs")));
    } else if (kind == "constant") {
      arms.push_back(ArmDistribution::constant(req_num(a, "value")));
    } else {
      config_fail("unknown arm kind '" + kind + "'");
    }
  }
  return arms;
}

std::vector<std::int64_t> trials_from_config(const json& config) {
  const json* s = find_field(config, "seeds");
  if (!s) return {0};
  std::vector<std::int64_t> trials;
  if (s->is_number_integer()) {
    const std::int64_t n = s->get<std::int64_t>();
    if (n < 1 || n > 1000000) config_fail("'seeds' count out of range");
    trials.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      trials[static_cast<std::size_t>(i)] = i;
    }
    return trials;
  }
  if (s->is_array()) {
    if (s->empty()) config_fail("'seeds' array must not be empty");
    for (const auto& e : *s) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
        config_fail("'seeds' entries must be nonnegative trial indices");
      }
      trials.push_back(e.get<std::int64_t>());
    }
    return trials;
  }
  config_fail("'seeds' must be a count or an array of trial indices");
}

}  // namespace

TrialRecord run_single_trial(Policy& policy, Environment& env,
                             std::int64_t horizon, std::uint64_t master_seed,
                             std::int64_t trial_index) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  if (trial_index < 0) {
    fail(ErrorCode::InvalidArgument, "trial index must be >= 0");
  }
  if (policy.num_arms() != env.num_arms()) {
    fail(ErrorCode::ConfigError, "policy and environment arm counts differ");
  }
  const auto trial = static_cast<std::uint64_t>(trial_index);
  Rng env_rng(derive_seed(master_seed, trial, 0));
  Rng policy_rng(derive_seed(master_seed, trial, 1));

  TrialRecord rec;
  rec.seed = derive_seed(master_seed, trial, 0);
  rec.losses.reserve(static_cast<std::size_t>(horizon));
  rec.base_losses.reserve(static_cast<std::size_t>(horizon));
  rec.arms.reserve(static_cast<std::size_t>(horizon));
  rec.observed.reserve(static_cast<std::size_t>(horizon));
  History history{&rec.losses, &rec.arms};

  for (std::int64_t t = 1; t <= horizon; ++t) {
    Vec p = policy.select();
    DrawnLosses drawn = env.draw(t, history, env_rng);
    const int arm = sample_arm(p, policy_rng.uniform01());
    const double observed = drawn.loss[static_cast<std::size_t>(arm)];
    policy.update(arm, observed);
    rec.losses.push_back(std::move(drawn.loss));
    rec.base_losses.push_back(std::move(drawn.base));
    rec.arms.push_back(arm);
    rec.observed.push_back(observed);
  }
  return rec;
}

AggregateResult run_trials(const TrialPlan& plan) {
  if (!plan.make_policy || !plan.make_environment) {
    fail(ErrorCode::InvalidArgument, "plan needs both factories");
  }
  if (plan.trials.empty()) {
    fail(ErrorCode::InvalidArgument, "plan has no trials");
  }
  if (plan.horizon < 1) {
    fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = plan.trials.size();
  Vec finals(n, 0.0), lstars(n, 0.0), v1s(n, 0.0), cs(n, 0.0), qs(n, 0.0);
  std::vector<Vec> pull_rows(n);

  TrajectoryAccumulator acc;
  std::map<std::size_t, Vec> ready;
  std::size_t fold_pos = 0;
  std::mutex fold_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        const std::int64_t trial = plan.trials[i];
        auto env = plan.make_environment(trial);
        auto policy = plan.make_policy(trial);
        TrialRecord rec = run_single_trial(*policy, *env, plan.horizon,
                                           plan.master_seed, trial);
        std::optional<TheoryInstance> gt;
        const TheoryInstance* gt_ptr = nullptr;
        if (plan.regret_mode == RegretMode::PseudoStochastic) {
          gt = env->ground_truth();
          gt_ptr = &*gt;
        }
        Vec traj = regret_trajectory(rec, plan.regret_mode, gt_ptr);

        TrialOutcome out;
        out.trial_index = trial;
        out.final_regret = traj.back();
        out.quantities.l_star = l_star(rec.losses);
        out.quantities.v_1 = v1(rec.losses);
        out.quantities.c_realized = corruption_realized(rec);
        out.quantities.pulls = pull_counts(rec);
        if (plan.compute_q_infty) {
          out.quantities.q_infty_upper = q_infty_upper(rec.losses).value;
        }

        finals[i] = out.final_regret;
        lstars[i] = out.quantities.l_star;
        v1s[i] = out.quantities.v_1;
        cs[i] = out.quantities.c_realized;
        qs[i] = out.quantities.q_infty_upper;
        Vec pulls_d(out.quantities.pulls.size());
        for (std::size_t a = 0; a < pulls_d.size(); ++a) {
          pulls_d[a] = static_cast<double>(out.quantities.pulls[a]);
        }
        pull_rows[i] = std::move(pulls_d);

        if (plan.on_trial) {
          out.regret = traj;
          if (plan.keep_records) out.record = std::move(rec);
          plan.on_trial(out);
        }

        std::lock_guard<std::mutex> lock(fold_mu);
        ready.emplace(i, std::move(traj));
        while (!ready.empty() && ready.begin()->first == fold_pos) {
          acc.add(ready.begin()->second);
          ready.erase(ready.begin());
          ++fold_pos;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(fold_mu);
        if (!first_error) first_error = std::current_exception();
        abort.store(true, std::memory_order_relaxed);
        break;
      }
    }
  };

  const int workers =
      std::max(1, std::min<int>(plan.workers, static_cast<int>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  AggregateResult res;
  res.mean_regret = acc.mean();
  res.se_regret = acc.standard_error();
  res.final_regret = scalar_stats(finals);
  res.l_star = scalar_stats(lstars);
  res.v_1 = scalar_stats(v1s);
  res.c_realized = scalar_stats(cs);
  res.q_infty = scalar_stats(qs);
  res.num_trials = static_cast<int>(n);
  if (!pull_rows.empty() && !pull_rows.front().empty()) {
    res.mean_pulls.assign(pull_rows.front().size(), 0.0);
    for (const auto& row : pull_rows) {
      for (std::size_t a = 0; a < row.size(); ++a) res.mean_pulls[a] += row[a];
    }
    for (auto& v : res.mean_pulls) v /= static_cast<double>(n);
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

std::unique_ptr<Policy> make_policy_from_spec(const json& spec, int num_arms,
                                              std::int64_t horizon) {
  const std::string kind = req_str(spec, "kind");
  if (kind == "bobw") {
    PolicyConfig cfg;
    cfg.num_arms = num_arms;
    cfg.horizon = horizon;
    cfg.epsilon = num_or(spec, "epsilon", 0.2);
    const std::string hint = str_or(spec, "hint_mode", "empirical_mean");
    if (hint == "empirical_mean") {
      cfg.hint_mode = HintMode::EmpiricalMean;
    } else if (hint == "ewma") {
      cfg.hint_mode = HintMode::Ewma;
    } else {
      config_fail("hint_mode must be 'empirical_mean' or 'ewma'");
    }
    cfg.ewma_eta = num_or(spec, "ewma_eta", 0.25);
    return std::make_unique<BobwPolicy>(cfg);
  }
  if (kind == "ucb1") return std::make_unique<Ucb1Policy>(num_arms);
  if (kind == "ucbv") {
    return std::make_unique<UcbVPolicy>(num_arms, num_or(spec, "zeta", 1.2));
  }
  if (kind == "tsallis_iw") {
    return std::make_unique<TsallisInfPolicy>(
        num_arms, TsallisEstimator::ImportanceWeighted);
  }
  if (kind == "tsallis_rv") {
    return std::make_unique<TsallisInfPolicy>(
        num_arms, TsallisEstimator::ReducedVariance);
  }
  if (kind == "uniform") return std::make_unique<UniformPolicy>(num_arms);
  config_fail("unknown policy kind '" + kind + "'");
}

std::unique_ptr<Environment> make_environment_from_spec(const json& spec) {
  const std::string kind = req_str(spec, "kind");
  if (kind == "stochastic") {
    return std::make_unique<StochasticEnvironment>(
        arms_from_json(spec, "arms"));
  }
  if (kind == "scripted") {
    if (find_field(spec, "csv")) {
      return std::make_unique<ScriptedEnvironment>(
          ScriptedEnvironment::from_csv(req_str(spec, "csv")));
    }
    const json* rows = find_field(spec, "rows");
    if (!rows || !rows->is_array() || rows->empty()) {
      config_fail("scripted environment needs 'csv' or non-empty 'rows'");
    }
    std::vector<Vec> matrix;
    matrix.reserve(rows->size());
    for (const auto& row : *rows) {
      if (!row.is_array()) config_fail("'rows' must be an array of arrays");
      Vec r;
      r.reserve(row.size());
      for (const auto& e : row) {
        if (!e.is_number()) config_fail("'rows' entries must be numbers");
        r.push_back(e.get<double>());
      }
      matrix.push_back(std::move(r));
    }
    return std::make_unique<ScriptedEnvironment>(std::move(matrix));
  }
  if (kind == "stochastically_constrained") {
    return std::make_unique<StochasticallyConstrainedEnvironment>(
        arms_from_json(spec, "arms"), arms_from_json(spec, "arms_b"),
        req_int(spec, "block_len"));
  }
  if (kind == "worst_case_switch") {
    return std::make_unique<WorstCaseSwitchEnvironment>(
        vec_field(spec, "profile_a"), vec_field(spec, "profile_b"),
        req_int(spec, "switch_round"));
  }
  if (kind == "corrupted") {
    const json& corr = req_obj(spec, "corruption");
    const std::string strat = req_str(corr, "strategy");
    CorruptionStrategy strategy;
    if (strat == "flip_optimal_prefix") {
      strategy = CorruptionStrategy::FlipOptimalPrefix;
    } else if (strat == "random_spikes") {
      strategy = CorruptionStrategy::RandomSpikes;
    } else {
      config_fail("corruption strategy must be 'flip_optimal_prefix' or "
                  "'random_spikes'");
    }
    return std::make_unique<CorruptedEnvironment>(
        arms_from_json(spec, "arms"), req_num(corr, "budget"), strategy,
        num_or(corr, "spike_rate", 0.05));
  }
  config_fail("unknown environment kind '" + kind + "'");
}

namespace {

// epsilon for bound overlays: the bobw policy's own value, otherwise an
// explicit top-level override.
double overlay_epsilon(const json& config, const json& policy_spec) {
  if (str_or(policy_spec, "kind", "") == "bobw") {
    return num_or(policy_spec, "epsilon", 0.2);
  }
  const json* e = find_field(config, "overlay_epsilon");
  if (!e) {
    config_fail("this overlay needs 'overlay_epsilon' when the policy is "
                "not bobw");
  }
  return req_num(config, "overlay_epsilon");
}

double overlay_eta(const json& config, const json& policy_spec) {
  if (str_or(policy_spec, "kind", "") == "bobw" &&
      str_or(policy_spec, "hint_mode", "empirical_mean") == "ewma") {
    return num_or(policy_spec, "ewma_eta", 0.25);
  }
  const json* e = find_field(config, "overlay_eta");
  if (!e) {
    config_fail("the pathlength overlay needs an ewma-hinted bobw policy or "
                "an explicit 'overlay_eta'");
  }
  return req_num(config, "overlay_eta");
}

struct OverlayNeeds {
  bool ground_truth = false;
  bool q_infty = false;
};

OverlayNeeds overlay_needs(const std::vector<std::string>& overlays) {
  OverlayNeeds needs;
  for (const auto& id : overlays) {
    if (id == "stochastic_upper" || id == "corrupted_upper" ||
        id == "lower_simplified" || id == "lower_approx") {
      needs.ground_truth = true;
    } else if (id == "adversarial_upper" || id == "pathlength_upper") {
      needs.q_infty = true;
    } else {
      config_fail("unknown theory overlay '" + id + "'");
    }
  }
  return needs;
}

}  // namespace

json run_experiment_json(const json& config, const CliOverrides& overrides) {
  if (!config.is_object()) config_fail("experiment config must be an object");
  const std::string name = str_or(config, "name", "experiment");
  const json& env_spec = req_obj(config, "environment");
  const json& policy_spec = req_obj(config, "policy");
  const std::int64_t horizon = req_int(config, "horizon");

  auto probe = make_environment_from_spec(env_spec);
  const int K = probe->num_arms();
  if (horizon < std::max<std::int64_t>(55, K)) {
    config_fail("horizon must be at least max(55, num_arms)");
  }
  if (auto* scripted = dynamic_cast<ScriptedEnvironment*>(probe.get())) {
    if (scripted->rounds() < horizon) {
      config_fail("scripted environment has fewer rows than the horizon");
    }
  }

  bool has_gt = true;
  TheoryInstance gt;
  try {
    gt = probe->ground_truth();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MissingGroundTruth) throw;
    has_gt = false;
  }

  const std::string mode_str = str_or(config, "regret_mode", "auto");
  RegretMode mode;
  if (mode_str == "pseudo") {
    if (!has_gt) {
      config_fail("pseudo regret needs an environment with ground truth");
    }
    mode = RegretMode::PseudoStochastic;
  } else if (mode_str == "realized") {
    mode = RegretMode::Realized;
  } else if (mode_str == "auto") {
    mode = has_gt ? RegretMode::PseudoStochastic : RegretMode::Realized;
  } else {
    config_fail("regret_mode must be auto, pseudo, or realized");
  }

  std::vector<std::string> overlays;
  if (const json* ov = find_field(config, "theory_overlays")) {
    if (!ov->is_array()) config_fail("'theory_overlays' must be an array");
    for (const auto& e : *ov) {
      if (!e.is_string()) config_fail("overlay ids must be strings");
      overlays.push_back(e.get<std::string>());
    }
  }
  const OverlayNeeds needs = overlay_needs(overlays);
  if (needs.ground_truth && !has_gt) {
    config_fail("a requested overlay needs a stochastic ground truth");
  }

  TrialPlan plan;
  plan.horizon = horizon;
  plan.master_seed = overrides.has_seed
                         ? overrides.seed
                         : static_cast<std::uint64_t>(int_or(
                               config, "master_seed", 1));
  plan.trials = trials_from_config(config);
  plan.workers = overrides.workers > 0
                     ? overrides.workers
                     : static_cast<int>(int_or(config, "workers", 1));
  plan.regret_mode = mode;
  plan.compute_q_infty =
      bool_or(config, "compute_q_infty", true) || needs.q_infty;
  plan.make_policy = [policy_spec, K, horizon](std::int64_t) {
    return make_policy_from_spec(policy_spec, K, horizon);
  };
  plan.make_environment = [env_spec](std::int64_t) {
    return make_environment_from_spec(env_spec);
  };

  AggregateResult agg = run_trials(plan);

  std::vector<theory::BoundReport> bounds;
  for (const auto& id : overlays) {
    if (id == "stochastic_upper") {
      bounds.push_back(theory::upper_bound_stochastic(
          gt, overlay_epsilon(config, policy_spec), horizon));
    } else if (id == "adversarial_upper") {
      bounds.push_back(theory::upper_bound_adversarial(
          K, horizon, agg.l_star.mean, agg.q_infty.mean));
    } else if (id == "pathlength_upper") {
      bounds.push_back(theory::upper_bound_pathlength(
          K, horizon, agg.l_star.mean, agg.q_infty.mean, agg.v_1.mean,
          overlay_eta(config, policy_spec)));
    } else if (id == "corrupted_upper") {
      double corruption = agg.c_realized.mean;
      if (str_or(env_spec, "kind", "") == "corrupted") {
        corruption = req_num(req_obj(env_spec, "corruption"), "budget");
      }
      bounds.push_back(theory::upper_bound_corrupted(
          gt, overlay_epsilon(config, policy_spec), horizon, corruption));
    } else if (id == "lower_simplified") {
      bounds.push_back(theory::lower_bound_simplified(gt));
    } else if (id == "lower_approx") {
      bounds.push_back(theory::lower_bound_approx_instance(gt));
    }
  }

  json summary;
  summary["name"] = name;
  summary["version"] = kVersion;
  summary["config"] = config;
  summary["master_seed"] = plan.master_seed;
  summary["num_trials"] = agg.num_trials;
  summary["horizon"] = horizon;
  summary["regret_mode"] =
      mode == RegretMode::PseudoStochastic ? "pseudo" : "realized";
  summary["final_regret"] = stats_json(agg.final_regret);
  summary["regret_per_log_t"] =
      agg.final_regret.mean / std::log(static_cast<double>(horizon));
  json dq;
  dq["l_star"] = stats_json(agg.l_star);
  dq["v_1"] = stats_json(agg.v_1);
  dq["c_realized"] = stats_json(agg.c_realized);
  dq["q_infty_upper"] =
      plan.compute_q_infty ? stats_json(agg.q_infty) : json(nullptr);
  dq["mean_pulls"] = agg.mean_pulls;
  summary["data_quantities"] = dq;
  json bounds_json = json::array();
  for (const auto& b : bounds) bounds_json.push_back(report_json(b));
  summary["bounds"] = bounds_json;
  summary["wall_seconds"] = agg.wall_seconds;

  const std::string out_dir = !overrides.out_dir.empty()
                                  ? overrides.out_dir
                                  : str_or(config, "output_dir", "");
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create directory " + out_dir);
    std::string csv;
    csv.reserve(32 * agg.mean_regret.size() + 64);
    csv += "round,mean_regret,se_regret\n";
    for (std::size_t t = 0; t < agg.mean_regret.size(); ++t) {
      csv += std::to_string(t + 1);
      csv += ',';
      csv += fmt_g(agg.mean_regret[t]);
      csv += ',';
      csv += fmt_g(agg.se_regret[t]);
      csv += '\n';
    }
    const fs::path dir(out_dir);
    write_file(dir / "trajectory.csv", csv);
    summary["files"] = json{{"trajectory_csv", (dir / "trajectory.csv").string()},
                            {"summary_json", (dir / "summary.json").string()}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
  }
  return summary;
}

json sweep_json(const json& config, const CliOverrides& overrides) {
  if (!config.is_object()) config_fail("sweep config must be an object");
  const std::string name = str_or(config, "name", "sweep");
  const json& base = req_obj(config, "base");
  const json& sweep = req_obj(config, "sweep");

  std::vector<json> policies;
  if (const json* p = find_field(sweep, "policies")) {
    if (!p->is_array() || p->empty()) {
      config_fail("'sweep.policies' must be a non-empty array");
    }
    for (const auto& e : *p) policies.push_back(e);
  } else {
    policies.push_back(req_obj(base, "policy"));
  }
  std::vector<std::int64_t> horizons;
  if (const json* h = find_field(sweep, "horizons")) {
    if (!h->is_array() || h->empty()) {
      config_fail("'sweep.horizons' must be a non-empty array");
    }
    for (const auto& e : *h) {
      if (!e.is_number_integer()) config_fail("horizons must be integers");
      horizons.push_back(e.get<std::int64_t>());
    }
  } else {
    horizons.push_back(req_int(base, "horizon"));
  }
  std::vector<double> epsilons;
  if (const json* e = find_field(sweep, "epsilons")) {
    if (!e->is_array() || e->empty()) {
      config_fail("'sweep.epsilons' must be a non-empty array");
    }
    for (const auto& v : *e) {
      if (!v.is_number()) config_fail("epsilons must be numbers");
      epsilons.push_back(v.get<double>());
    }
  }

  json rows = json::array();
  json cells = json::array();
  std::string csv =
      "policy,horizon,epsilon,final_regret_mean,final_regret_se,"
      "regret_per_log_t,bound_value\n";

  CliOverrides cell_overrides = overrides;
  cell_overrides.out_dir.clear();  // cells do not write their own files

  for (const auto& policy_spec : policies) {
    const std::string kind = req_str(policy_spec, "kind");
    const bool sweep_eps = kind == "bobw" && !epsilons.empty();
    const std::size_t eps_cells = sweep_eps ? epsilons.size() : 1;
    for (std::int64_t T : horizons) {
      for (std::size_t ei = 0; ei < eps_cells; ++ei) {
        json cell = base;
        json pol = policy_spec;
        if (sweep_eps) pol["epsilon"] = epsilons[ei];
        cell["policy"] = pol;
        cell["horizon"] = T;
        cell.erase("output_dir");
        std::string label = kind + "_T" + std::to_string(T);
        if (sweep_eps) label += "_eps" + fmt_g(epsilons[ei]);
        cell["name"] = name + "/" + label;

        // Overlays that need the proposed policy's tuning are dropped for
        // baseline cells unless the config supplies the explicit overlay
        // parameter; such rows get an empty bound column instead of failing
        // the whole sweep.
        if (kind != "bobw" && cell.contains("theory_overlays")) {
          json kept = json::array();
          for (const auto& id : cell["theory_overlays"]) {
            const std::string s = id.get<std::string>();
            const bool needs_eps =
                s == "stochastic_upper" || s == "corrupted_upper";
            const bool needs_eta = s == "pathlength_upper";
            if (needs_eps && !find_field(cell, "overlay_epsilon")) continue;
            if (needs_eta && !find_field(cell, "overlay_eta")) continue;
            kept.push_back(s);
          }
          cell["theory_overlays"] = kept;
        }

        json summary = run_experiment_json(cell, cell_overrides);

        json row;
        row["policy"] = kind;
        row["horizon"] = T;
        row["epsilon"] = kind == "bobw" ? json(num_or(pol, "epsilon", 0.2))
                                        : json(nullptr);
        row["final_regret_mean"] = summary["final_regret"]["mean"];
        row["final_regret_se"] = summary["final_regret"]["se"];
        row["regret_per_log_t"] = summary["regret_per_log_t"];
        row["bound_value"] = summary["bounds"].empty()
                                 ? json(nullptr)
                                 : summary["bounds"][0]["value"];
        rows.push_back(row);
        cells.push_back(summary);

        csv += kind;
        csv += ',';
        csv += std::to_string(T);
        csv += ',';
        if (kind == "bobw") csv += fmt_g(num_or(pol, "epsilon", 0.2));
        csv += ',';
        csv += fmt_g(summary["final_regret"]["mean"].get<double>());
        csv += ',';
        csv += fmt_g(summary["final_regret"]["se"].get<double>());
        csv += ',';
        csv += fmt_g(summary["regret_per_log_t"].get<double>());
        csv += ',';
        if (!summary["bounds"].empty()) {
          csv += fmt_g(summary["bounds"][0]["value"].get<double>());
        }
        csv += '\n';
      }
    }
  }

  json out;
  out["name"] = name;
  out["version"] = kVersion;
  out["config"] = config;
  out["rows"] = rows;
  out["cells"] = cells;

  const std::string out_dir = !overrides.out_dir.empty()
                                  ? overrides.out_dir
                                  : str_or(config, "output_dir", "");
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create directory " + out_dir);
    const fs::path dir(out_dir);
    write_file(dir / "comparison.csv", csv);
    out["files"] = json{{"comparison_csv", (dir / "comparison.csv").string()},
                        {"comparison_json", (dir / "comparison.json").string()}};
    write_file(dir / "comparison.json", out.dump(2) + "\n");
  }
  return out;
}

namespace {

TheoryInstance instance_from_json(const json& request) {
  const json* inst = find_field(request, "instance");
  if (!inst || !inst->is_object()) {
    config_fail("missing 'instance' object with 'mu' (and 'sigma_sq')");
  }
  TheoryInstance t;
  t.mu = vec_field(*inst, "mu");
  if (t.mu.size() < 2) config_fail("instance needs at least two arms");
  if (find_field(*inst, "sigma_sq")) {
    t.sigma_sq = vec_field(*inst, "sigma_sq");
  } else {
    t.sigma_sq.assign(t.mu.size(), 0.0);
  }
  if (t.sigma_sq.size() != t.mu.size()) {
    config_fail("instance 'sigma_sq' length must match 'mu'");
  }
  t.optimal_arm = static_cast<int>(
      std::min_element(t.mu.begin(), t.mu.end()) - t.mu.begin());
  t.unique_optimal =
      std::count(t.mu.begin(), t.mu.end(), t.mu_star()) == 1;
  t.validate();
  return t;
}

json eval_one_bound(const json& request) {
  const std::string id = req_str(request, "formula_id");
  if (id == "stochastic_upper") {
    return report_json(theory::upper_bound_stochastic(
        instance_from_json(request), req_num(request, "epsilon"),
        req_int(request, "T")));
  }
  if (id == "adversarial_upper") {
    return report_json(theory::upper_bound_adversarial(
        static_cast<int>(req_int(request, "K")), req_int(request, "T"),
        req_num(request, "l_star"), req_num(request, "q_infty")));
  }
  if (id == "pathlength_upper") {
    return report_json(theory::upper_bound_pathlength(
        static_cast<int>(req_int(request, "K")), req_int(request, "T"),
        req_num(request, "l_star"), req_num(request, "q_infty"),
        req_num(request, "v_1"), req_num(request, "eta")));
  }
  if (id == "corrupted_upper") {
    return report_json(theory::upper_bound_corrupted(
        instance_from_json(request), req_num(request, "epsilon"),
        req_int(request, "T"), req_num(request, "corruption")));
  }
  if (id == "lower_simplified") {
    return report_json(
        theory::lower_bound_simplified(instance_from_json(request)));
  }
  if (id == "lower_approx") {
    if (find_field(request, "z")) {
      const double z = req_num(request, "z");
      theory::BoundReport r;
      r.formula_id = "lower_approx";
      r.value = theory::lower_bound_approx(z);
      r.inputs["z"] = z;
      r.inputs["refined"] = theory::lower_bound_approx_refined(z);
      r.notes = "per-arm rate at z = sigma_sq/gap, per log T";
      return report_json(r);
    }
    return report_json(
        theory::lower_bound_approx_instance(instance_from_json(request)));
  }
  config_fail("unknown formula_id '" + id + "'");
}

}  // namespace

json eval_bounds_json(const json& request) {
  if (request.is_array()) {
    json out = json::array();
    for (const auto& r : request) out.push_back(eval_one_bound(r));
    return out;
  }
  return eval_one_bound(request);
}

namespace {

// Golden-section maximization of a unimodal f on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, int iters = 220) {
  const double gr = 0.6180339887498949;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
    if (hi - lo < 1e-15 * (1.0 + std::abs(lo))) break;
  }
  return std::max(fc, fd);
}

json check_row(const std::string& name, bool pass, double measured,
               double threshold, const std::string& detail) {
  return json{{"name", name},
              {"pass", pass},
              {"measured", measured},
              {"threshold", threshold},
              {"detail", detail}};
}

}  // namespace

json verify_claims_json(const json& options) {
  if (!options.is_object() && !options.is_null()) {
    config_fail("verify options must be an object");
  }
  const json opts = options.is_null() ? json::object() : options;
  const bool quick = bool_or(opts, "quick", false);
  const double approx_tol = num_or(opts, "approx_tol", 0.06);
  const double refined_tol = num_or(opts, "refined_tol", 0.006);
  const double eps = num_or(opts, "epsilon", 0.2);
  const double envelope_c = num_or(opts, "envelope_c", 4.2);
  const int z_points =
      static_cast<int>(int_or(opts, "z_points", quick ? 40 : 200));
  const int envelope_points =
      static_cast<int>(int_or(opts, "envelope_points", quick ? 2000 : 10000));
  const int equivalence_count = static_cast<int>(
      int_or(opts, "equivalence_count", quick ? 500 : 10000));
  const int draws = static_cast<int>(int_or(opts, "draws", quick ? 100 : 1000));

  json checks = json::array();

  // 1-2) closed-form approximations of the lower-bound rate.
  {
    const auto av = theory::verify_approx(1e-3, 1e3, z_points);
    checks.push_back(check_row(
        "approx_plain", av.max_rel_error_plain <= approx_tol,
        av.max_rel_error_plain, approx_tol,
        "worst z = " + fmt_g(av.worst_z_plain) + " over " +
            std::to_string(av.z_points) + " grid points"));
    checks.push_back(check_row(
        "approx_refined", av.max_rel_error_refined <= refined_tol,
        av.max_rel_error_refined, refined_tol,
        "worst z = " + fmt_g(av.worst_z_refined)));
  }

  // 3) h stays under the reporting envelope.
  {
    const auto env = theory::check_h_envelope(eps, envelope_c, envelope_points);
    checks.push_back(check_row(
        "h_envelope", env.holds, env.max_violation, 0.0,
        "eps = " + fmt_g(eps) + ", c = " + fmt_g(envelope_c) +
            ", worst z = " + fmt_g(env.worst_z) +
            ", smallest sufficient c = " + fmt_g(env.fitted_c)));
  }

  // 4) raw moment form of the lower-bound denominator agrees with the
  // simplified form.
  {
    Rng rng(0x5eedULL);
    double worst = 0.0;
    for (int i = 0; i < equivalence_count; ++i) {
      const double mu_star = 0.01 + 0.9 * rng.uniform01();
      const double frac = 0.001 + 0.999 * rng.uniform01();
      const double mu = mu_star + (0.999 - mu_star) * frac;
      const double cap = mu * (1.0 - mu);
      const double s = cap * std::max(1e-6, rng.uniform01());
      const double d1 = theory::lower_denominator(mu_star, mu, s);
      const double m1 = 1.0 - mu;
      const double d2 = theory::dinf2_raw(m1, m1 * m1 + s, 1.0 - mu_star);
      worst = std::max(worst, std::abs(d1 - d2));
    }
    checks.push_back(check_row(
        "moment_equivalence", worst <= 1e-9, worst, 1e-9,
        std::to_string(equivalence_count) + " random valid instances"));
  }

  // 5-7) closed-form maxima vs. independent golden-section maximization.
  {
    Rng rng(0xfeedULL);
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = 0.05 + 0.9 * rng.uniform01();
      const double a = -0.9 / x + (5.0 + 0.9 / x) * rng.uniform01();
      const double closed = ftrl::max_gain_logbarrier(a, x);
      const double numeric = golden_max(
          [&](double y) {
            return a * (x - y) - (y / x - 1.0 - std::log(y / x));
          },
          1e-9, 200.0 * x + 1.0);
      worst = std::max(worst, std::abs(closed - numeric));
    }
    checks.push_back(check_row("closed_form_logbarrier", worst <= 1e-6, worst,
                               1e-6, std::to_string(draws) + " draws"));
  }
  {
    Rng rng(0xbeefULL);
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = 0.05 + 0.9 * rng.uniform01();
      const double a = -3.0 + 6.0 * rng.uniform01();
      const double closed = ftrl::max_gain_compentropy(a, x);
      const double psi_x = (1.0 - x) * std::log(1.0 - x);
      const double slope = std::log(1.0 - x) + 1.0;
      const double numeric = golden_max(
          [&](double y) {
            const double psi_y = (1.0 - y) * std::log(1.0 - y);
            return a * (x - y) - (psi_y - psi_x + slope * (y - x));
          },
          -25.0, 1.0 - 1e-12);
      worst = std::max(worst, std::abs(closed - numeric));
    }
    checks.push_back(check_row("closed_form_compentropy", worst <= 1e-6,
                               worst, 1e-6, std::to_string(draws) + " draws"));
  }
  {
    Rng rng(0xcafeULL);
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double a = 0.1 + 9.9 * rng.uniform01();
      const double b = 0.1 + 9.9 * rng.uniform01();
      const double c = 0.1 + 9.9 * rng.uniform01();
      const double closed = ftrl::max_linear_log_quadratic(a, b, c);
      const double numeric = golden_max(
          [&](double y) { return a * y + b * std::log(y) - c * y * y; },
          1e-12, 400.0);
      worst = std::max(worst, std::abs(closed - numeric));
    }
    checks.push_back(check_row("closed_form_linear_log_quadratic",
                               worst <= 1e-6, worst, 1e-6,
                               std::to_string(draws) + " draws"));
  }

  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  json out;
  out["pass"] = pass;
  out["checks"] = checks;
  out["options"] = json{{"approx_tol", approx_tol},
                        {"refined_tol", refined_tol},
                        {"epsilon", eps},
                        {"envelope_c", envelope_c},
                        {"z_points", z_points},
                        {"envelope_points", envelope_points},
                        {"equivalence_count", equivalence_count},
                        {"draws", draws},
                        {"quick", quick}};
  out["version"] = kVersion;
  return out;
}

}  // namespace bobw::harness
