#ifndef BOBW_C_API_H
#define BOBW_C_API_H

/* C interface of the bobw shared library: opaque policy handles plus
 * JSON-in/JSON-out entry points for experiments, bound evaluation, and the
 * numeric verification suite. Every function returns a status code; on
 * failure bobw_last_error() carries the diagnostic for the calling thread.
 * Strings returned through char** out parameters are heap-allocated and
 * must be released with bobw_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bobw_status {
  BOBW_OK = 0,
  BOBW_ERR_INVALID_ARGUMENT = 1,
  BOBW_ERR_DOMAIN = 2,
  BOBW_ERR_NOT_SIMPLEX = 3,
  BOBW_ERR_CONFIG = 4,
  BOBW_ERR_STATE = 5,
  BOBW_ERR_CONVERGENCE = 6,
  BOBW_ERR_SPEC = 7,
  BOBW_ERR_MISSING_GROUND_TRUTH = 8,
  BOBW_ERR_IO = 9,
  BOBW_ERR_UNKNOWN = 255
} bobw_status;

typedef struct bobw_policy bobw_policy;

/* Library version string (static storage, do not free). */
const char* bobw_version(void);

/* Message of the most recent failing call on this thread; "" if none.
 * Valid until the next library call on the same thread. */
const char* bobw_last_error(void);

/* Releases a string returned through a char** out parameter. NULL is ok. */
void bobw_string_free(char* s);

/* Creates a policy. config_json fields: kind (one of "bobw", "ucb1",
 * "ucbv", "tsallis_iw", "tsallis_rv", "uniform"), num_arms, and for the
 * bobw kind: horizon (>= max(55, num_arms)), optional epsilon (default
 * 0.2), hint_mode ("empirical_mean" | "ewma"), ewma_eta; "ucbv" accepts
 * zeta. */
bobw_status bobw_policy_create(const char* config_json, bobw_policy** out);

void bobw_policy_destroy(bobw_policy* p);

bobw_status bobw_policy_num_arms(const bobw_policy* p, int* out);

/* Static name of the policy kind; owned by the policy, do not free. */
bobw_status bobw_policy_name(const bobw_policy* p, const char** out);

/* Fills probs[0..len) with the distribution for the current round.
 * len must equal num_arms. Must alternate with bobw_policy_update. */
bobw_status bobw_policy_select(bobw_policy* p, double* probs, size_t len);

/* Maps a uniform draw u in [0,1) to an arm via the inverse CDF of the most
 * recent select(); the caller owns the randomness. */
bobw_status bobw_policy_sample(const bobw_policy* p, double u, int* out_arm);

/* Feeds the observed loss (in [0,1]) of the played arm back. */
bobw_status bobw_policy_update(bobw_policy* p, int arm, double loss);

/* JSON snapshot of a "bobw"-kind policy between rounds (StateError for
 * other kinds or mid-round). Restore resumes bit-identically. */
bobw_status bobw_policy_state_json(const bobw_policy* p, char** out_json);
bobw_status bobw_policy_restore(const char* state_json, bobw_policy** out);

/* Runs a full experiment config (see docs/config_schema.md): seeded trials,
 * aggregation, optional theory overlays. out_dir NULL or "" skips file
 * output, otherwise trajectory.csv and summary.json are written there.
 * workers <= 0 defers to the config (default 1). When has_seed_override is
 * nonzero, seed_override replaces the config's master_seed. */
bobw_status bobw_run_experiment(const char* config_json, const char* out_dir,
                                int workers, int has_seed_override,
                                uint64_t seed_override,
                                char** out_summary_json);

/* Cartesian sweep (policies x horizons x epsilons); writes comparison.csv
 * and comparison.json when out_dir is given. */
bobw_status bobw_sweep(const char* config_json, const char* out_dir,
                       int workers, int has_seed_override,
                       uint64_t seed_override, char** out_json);

/* Evaluates a bound request (object or array of objects) to BoundReport
 * JSON. */
bobw_status bobw_eval_bounds(const char* request_json, char** out_json);

/* Numeric-claim verification suite. options_json may be NULL or "" for
 * defaults. *out_pass is 1 iff every check passed. */
bobw_status bobw_verify(const char* options_json, char** out_report_json,
                        int* out_pass);

#ifdef __cplusplus
}
#endif

#endif /* BOBW_C_API_H */
