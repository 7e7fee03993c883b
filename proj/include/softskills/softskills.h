/* Soft-skill mining and salary/gender analysis: C interface.
 *
 * All functions return an ss_status. On failure a description of the most
 * recent error on the calling thread is available from ss_last_error_message().
 * Handles are opaque; a handle may be used from several threads only for
 * read-only calls (ss_detector_detect, ss_config_get, ss_config_digest).
 */
#ifndef SOFTSKILLS_SOFTSKILLS_H
#define SOFTSKILLS_SOFTSKILLS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SS_API __declspec(dllexport)
#else
#define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_INVALID_ARGUMENT = 1, /* null pointer, too-small buffer */
  SS_ERR_VALIDATION = 2,       /* bad values or inconsistent configuration */
  SS_ERR_PARSE = 3,            /* malformed input file */
  SS_ERR_IO = 4,               /* missing or unwritable file */
  SS_ERR_NO_DATA = 5,          /* the requested quantity is undefined for the input */
  SS_ERR_INTERNAL = 99
} ss_status;

SS_API const char* ss_version(void);
SS_API const char* ss_status_string(ss_status status);
/* Message for the last failing call on this thread; "" when none. */
SS_API const char* ss_last_error_message(void);

/* ---- configuration ------------------------------------------------------ */

typedef struct ss_config ss_config;

SS_API ss_status ss_config_create(ss_config** out);
SS_API void ss_config_destroy(ss_config* config);
/* Merges a JSON config file over the current values. */
SS_API ss_status ss_config_load(ss_config* config, const char* path);
/* Sets one key from its textual form; unknown keys and out-of-range values
 * are rejected with SS_ERR_VALIDATION. */
SS_API ss_status ss_config_set(ss_config* config, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated). *needed receives the size
 * including the terminator; SS_ERR_INVALID_ARGUMENT when buf is too small. */
SS_API ss_status ss_config_get(const ss_config* config, const char* key, char* buf, size_t capacity,
                               size_t* needed);
/* Names of the recognised keys, index 0 .. ss_config_key_count() - 1. */
SS_API size_t ss_config_key_count(void);
SS_API const char* ss_config_key_name(size_t index);
/* 64 hex characters plus NUL. */
SS_API ss_status ss_config_digest(const ss_config* config, char out[65]);

/* ---- pipeline commands --------------------------------------------------- */

SS_API ss_status ss_run_build_lexicon(const ss_config* config);
SS_API ss_status ss_run_snippets(const ss_config* config);
SS_API ss_status ss_run_detect(const ss_config* config);
SS_API ss_status ss_run_analyze(const ss_config* config);

/* Pretty-prints a report. *out must be released with ss_string_free. */
SS_API ss_status ss_render_report(const char* path, char** out);
SS_API void ss_string_free(char* s);

/* ---- detection ----------------------------------------------------------- */

typedef struct ss_detector ss_detector;

/* competence_terms_path may be NULL for the built-in list. */
SS_API ss_status ss_detector_open(const char* lexicon_path, const char* stopwords_path,
                                  const char* competence_terms_path, uint32_t max_gap, ss_detector** out);
SS_API void ss_detector_close(ss_detector* detector);
/* Writes the sorted distinct cluster ids found in text. *count receives the
 * number found even when it exceeds capacity (then SS_ERR_INVALID_ARGUMENT). */
SS_API ss_status ss_detector_detect(const ss_detector* detector, const char* text, int32_t* out_ids,
                                    size_t capacity, size_t* count);

/* ---- statistics ---------------------------------------------------------- */

/* (treated - control) / control * 100. */
SS_API ss_status ss_reward_cell(double treated_mean, double control_mean, double* out);
/* Trust-weighted share of Candidate votes. is_candidate[i] != 0 marks one. */
SS_API ss_status ss_compute_confidence(const double* trusts, const int* is_candidate, size_t n, double* out);
/* (p_f - p_m) / max(p_f, p_m) * 100; SS_ERR_NO_DATA when both are zero. */
SS_API ss_status ss_relative_difference(double p_f, double p_m, double* out);

typedef struct ss_t_test_result {
  double t;
  double df;
  double p;
  int degenerate_variance;
} ss_t_test_result;

SS_API ss_status ss_welch_t_test(const double* a, size_t na, const double* b, size_t nb, ss_t_test_result* out);
/* one_tailed != 0 tests mean(a) > mean(b). */
SS_API ss_status ss_equal_var_t_test(const double* a, size_t na, const double* b, size_t nb, int one_tailed,
                                     ss_t_test_result* out);

#ifdef __cplusplus
}
#endif

#endif /* SOFTSKILLS_SOFTSKILLS_H */
