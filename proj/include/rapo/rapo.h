#ifndef RAPO_RAPO_H
#define RAPO_RAPO_H

#include <stddef.h>
#include <stdint.h>

#if defined(RAPO_BUILDING_LIBRARY)
#define RAPO_API __attribute__((visibility("default")))
#else
#define RAPO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rapo_status {
  RAPO_OK = 0,
  RAPO_ERR_CONFIG = 1,   /* invalid configuration or shape mismatch */
  RAPO_ERR_INPUT = 2,    /* invalid argument or token */
  RAPO_ERR_NUMERIC = 3,  /* non-finite intermediate */
  RAPO_ERR_FORMAT = 4,   /* malformed file content */
  RAPO_ERR_IO = 5,       /* file system failure */
  RAPO_ERR_INTERNAL = 6,
  RAPO_ERR_CHECK_FAILED = 7 /* a verification ran and did not pass */
} rapo_status;

typedef struct rapo_config rapo_config;
typedef struct rapo_params rapo_params;

/* Message for the last non-OK status on the calling thread. Valid until the
 * next call on that thread. Never NULL. */
RAPO_API const char* rapo_last_error(void);
RAPO_API const char* rapo_version(void);

/* Configuration ------------------------------------------------------------ */
RAPO_API rapo_status rapo_config_load(const char* path, rapo_config** out);
RAPO_API rapo_status rapo_config_parse(const char* json, rapo_config** out);
/* One of "rapo", "wo_urm", "wo_sd", "wo_urm_sd". */
RAPO_API rapo_status rapo_config_preset(const char* name, rapo_config** out);
RAPO_API rapo_status rapo_config_set_seed(rapo_config* cfg, uint64_t seed);
/* Canonical JSON. The string is owned by cfg and valid until the next call
 * on cfg or its destruction. */
RAPO_API rapo_status rapo_config_to_json(rapo_config* cfg, const char** json);
RAPO_API rapo_status rapo_config_hash(rapo_config* cfg, const char** hex);
RAPO_API void rapo_config_destroy(rapo_config* cfg);

/* Training and evaluation -------------------------------------------------- */
typedef struct rapo_eval_summary {
  int32_t episodes;
  int32_t turns;
  double mean_true_outcome;
  double mean_turn_outcome;
  double mean_end_distress;
  double mean_entropy;
  double mean_length;
  double template_rate;
} rapo_eval_summary;

typedef struct rapo_train_summary {
  int64_t steps;
  rapo_eval_summary initial_evaluation;
  rapo_eval_summary final_evaluation;
} rapo_train_summary;

/* Writes metrics.jsonl, evaluations.jsonl, prompts.jsonl, params.json and
 * run_record.json into out_dir. summary may be NULL. */
RAPO_API rapo_status rapo_train(const rapo_config* cfg, const char* out_dir,
                                rapo_train_summary* summary);

RAPO_API rapo_status rapo_params_load(const char* path, rapo_params** out);
/* Zero weights shaped for cfg. */
RAPO_API rapo_status rapo_params_zeros(const rapo_config* cfg, rapo_params** out);
RAPO_API rapo_status rapo_params_save(const rapo_params* params, const char* path);
RAPO_API rapo_status rapo_params_shape(const rapo_params* params, int32_t* vocab_size,
                                       int32_t* dimension);
RAPO_API void rapo_params_destroy(rapo_params* params);

/* episodes/turns <= 0 take the config's eval settings. */
RAPO_API rapo_status rapo_evaluate(const rapo_config* cfg, const rapo_params* params,
                                   int32_t episodes, int32_t turns, uint64_t seed,
                                   rapo_eval_summary* out);

/* Corpus and selection ----------------------------------------------------- */
/* cfg may be NULL for default environment constants. mix is a spec such as
 * "template_heavy=1,advice_rusher=0.5"; NULL or "" means uniform. */
RAPO_API rapo_status rapo_generate_corpus(const rapo_config* cfg, const char* path,
                                          int64_t n_dialogues, uint64_t seed, const char* mix);

typedef struct rapo_selection_report {
  int64_t total;
  int64_t kept;
  int64_t malformed;
  int64_t pivotal_distress;
  int64_t pivotal_trust;
  int64_t low_signal;
  double tau;
  double kept_fraction;
} rapo_selection_report;

RAPO_API rapo_status rapo_select_corpus(const char* in_path, const char* out_path, double tau,
                                        rapo_selection_report* report);

/* Verification ------------------------------------------------------------- */
/* Finite-difference check of the GRPO surrogate and SD loss gradients at
 * params (zeros when NULL). *report_json is a thread-local string valid until
 * the next call on this thread. Returns RAPO_ERR_CHECK_FAILED when a check
 * does not pass. */
RAPO_API rapo_status rapo_gradcheck(const rapo_config* cfg, const rapo_params* params,
                                    uint64_t seed, const char** report_json);

/* Curves ------------------------------------------------------------------- */
/* labels may be NULL, in which case run i is labelled "curves" (one run) or
 * "run<i>". */
RAPO_API rapo_status rapo_emit_curves(const char* const* metrics_paths, const char* const* labels,
                                      size_t n_runs, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* RAPO_RAPO_H */
