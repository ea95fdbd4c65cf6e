#include "bobw/c_api.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "bobw/baselines.hpp"
#include "bobw/core.hpp"
#include "bobw/harness.hpp"
#include "bobw/policy.hpp"
#include "bobw/version.hpp"

using nlohmann::json;

struct bobw_policy {
  std::unique_ptr<bobw::Policy> impl;
  bobw::Vec last_p;
  bool has_distribution = false;
};

namespace {

thread_local std::string g_last_error;

bobw_status map_code(bobw::ErrorCode code) {
  switch (code) {
    case bobw::ErrorCode::InvalidArgument: return BOBW_ERR_INVALID_ARGUMENT;
    case bobw::ErrorCode::DomainError: return BOBW_ERR_DOMAIN;
    case bobw::ErrorCode::NotSimplex: return BOBW_ERR_NOT_SIMPLEX;
    case bobw::ErrorCode::ConfigError: return BOBW_ERR_CONFIG;
    case bobw::ErrorCode::StateError: return BOBW_ERR_STATE;
    case bobw::ErrorCode::ConvergenceFailure: return BOBW_ERR_CONVERGENCE;
    case bobw::ErrorCode::SpecError: return BOBW_ERR_SPEC;
    case bobw::ErrorCode::MissingGroundTruth:
      return BOBW_ERR_MISSING_GROUND_TRUTH;
    case bobw::ErrorCode::IoError: return BOBW_ERR_IO;
  }
  return BOBW_ERR_UNKNOWN;
}

template <class F>
bobw_status wrap(F&& body) {
  try {
    body();
    g_last_error.clear();
    return BOBW_OK;
  } catch (const bobw::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BOBW_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return BOBW_ERR_UNKNOWN;
  }
}

[[noreturn]] void invalid(const char* msg) {
  bobw::fail(bobw::ErrorCode::InvalidArgument, msg);
}

json parse_json(const char* text, const char* what) {
  if (text == nullptr) invalid("null JSON input");
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    bobw::fail(bobw::ErrorCode::ConfigError,
               std::string(what) + ": JSON parse error: " + e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* bobw_version(void) { return bobw::kVersion; }

const char* bobw_last_error(void) { return g_last_error.c_str(); }

void bobw_string_free(char* s) { std::free(s); }

bobw_status bobw_policy_create(const char* config_json, bobw_policy** out) {
  return wrap([&] {
    if (out == nullptr) invalid("null out pointer");
    *out = nullptr;
    const json cfg = parse_json(config_json, "policy config");
    if (!cfg.is_object()) {
      bobw::fail(bobw::ErrorCode::ConfigError,
                 "policy config must be a JSON object");
    }
    auto arms_it = cfg.find("num_arms");
    if (arms_it == cfg.end() || !arms_it->is_number_integer()) {
      bobw::fail(bobw::ErrorCode::ConfigError,
                 "policy config needs integer 'num_arms'");
    }
    const int num_arms = arms_it->get<int>();
    std::int64_t horizon = 0;
    if (auto it = cfg.find("horizon");
        it != cfg.end() && it->is_number_integer()) {
      horizon = it->get<std::int64_t>();
    }
    auto handle = std::make_unique<bobw_policy>();
    handle->impl = bobw::harness::make_policy_from_spec(cfg, num_arms, horizon);
    *out = handle.release();
  });
}

void bobw_policy_destroy(bobw_policy* p) { delete p; }

bobw_status bobw_policy_num_arms(const bobw_policy* p, int* out) {
  return wrap([&] {
    if (p == nullptr || out == nullptr) invalid("null argument");
    *out = p->impl->num_arms();
  });
}

bobw_status bobw_policy_name(const bobw_policy* p, const char** out) {
  return wrap([&] {
    if (p == nullptr || out == nullptr) invalid("null argument");
    *out = p->impl->name();
  });
}

bobw_status bobw_policy_select(bobw_policy* p, double* probs, size_t len) {
  return wrap([&] {
    if (p == nullptr || probs == nullptr) invalid("null argument");
    if (len != static_cast<size_t>(p->impl->num_arms())) {
      invalid("probs length must equal num_arms");
    }
    bobw::Vec dist = p->impl->select();
    std::memcpy(probs, dist.data(), dist.size() * sizeof(double));
    p->last_p = std::move(dist);
    p->has_distribution = true;
  });
}

bobw_status bobw_policy_sample(const bobw_policy* p, double u, int* out_arm) {
  return wrap([&] {
    if (p == nullptr || out_arm == nullptr) invalid("null argument");
    if (!p->has_distribution) {
      bobw::fail(bobw::ErrorCode::StateError,
                 "sample needs a preceding select on this handle");
    }
    *out_arm = bobw::sample_arm(p->last_p, u);
  });
}

bobw_status bobw_policy_update(bobw_policy* p, int arm, double loss) {
  return wrap([&] {
    if (p == nullptr) invalid("null policy");
    p->impl->update(arm, loss);
    p->has_distribution = false;
  });
}

bobw_status bobw_policy_state_json(const bobw_policy* p, char** out_json) {
  return wrap([&] {
    if (p == nullptr || out_json == nullptr) invalid("null argument");
    *out_json = nullptr;
    auto* bobw_impl = dynamic_cast<const bobw::BobwPolicy*>(p->impl.get());
    if (bobw_impl == nullptr) {
      bobw::fail(bobw::ErrorCode::StateError,
                 "state snapshots exist for the bobw policy kind only");
    }
    *out_json = dup_string(bobw_impl->state_json());
  });
}

bobw_status bobw_policy_restore(const char* state_json, bobw_policy** out) {
  return wrap([&] {
    if (out == nullptr) invalid("null out pointer");
    *out = nullptr;
    if (state_json == nullptr) invalid("null state JSON");
    auto handle = std::make_unique<bobw_policy>();
    handle->impl = std::make_unique<bobw::BobwPolicy>(
        bobw::BobwPolicy::from_state_json(state_json));
    *out = handle.release();
  });
}

bobw_status bobw_run_experiment(const char* config_json, const char* out_dir,
                                int workers, int has_seed_override,
                                uint64_t seed_override,
                                char** out_summary_json) {
  return wrap([&] {
    if (out_summary_json == nullptr) invalid("null out pointer");
    *out_summary_json = nullptr;
    const json cfg = parse_json(config_json, "experiment config");
    bobw::harness::CliOverrides ov;
    ov.out_dir = out_dir == nullptr ? "" : out_dir;
    ov.workers = workers;
    ov.has_seed = has_seed_override != 0;
    ov.seed = seed_override;
    const json summary = bobw::harness::run_experiment_json(cfg, ov);
    *out_summary_json = dup_string(summary.dump(2));
  });
}

bobw_status bobw_sweep(const char* config_json, const char* out_dir,
                       int workers, int has_seed_override,
                       uint64_t seed_override, char** out_json) {
  return wrap([&] {
    if (out_json == nullptr) invalid("null out pointer");
    *out_json = nullptr;
    const json cfg = parse_json(config_json, "sweep config");
    bobw::harness::CliOverrides ov;
    ov.out_dir = out_dir == nullptr ? "" : out_dir;
    ov.workers = workers;
    ov.has_seed = has_seed_override != 0;
    ov.seed = seed_override;
    const json result = bobw::harness::sweep_json(cfg, ov);
    *out_json = dup_string(result.dump(2));
  });
}

bobw_status bobw_eval_bounds(const char* request_json, char** out_json) {
  return wrap([&] {
    if (out_json == nullptr) invalid("null out pointer");
    *out_json = nullptr;
    const json request = parse_json(request_json, "bounds request");
    const json result = bobw::harness::eval_bounds_json(request);
    *out_json = dup_string(result.dump(2));
  });
}

bobw_status bobw_verify(const char* options_json, char** out_report_json,
                        int* out_pass) {
  return wrap([&] {
    if (out_report_json == nullptr || out_pass == nullptr) {
      invalid("null out pointer");
    }
    *out_report_json = nullptr;
    *out_pass = 0;
    json options = json::object();
    if (options_json != nullptr && options_json[0] != '\0') {
      options = parse_json(options_json, "verify options");
    }
    const json report = bobw::harness::verify_claims_json(options);
    *out_pass = report.at("pass").get<bool>() ? 1 : 0;
    *out_report_json = dup_string(report.dump(2));
  });
}

}  // extern "C"
