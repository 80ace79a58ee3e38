#ifndef AUTOCAPTION_H
#define AUTOCAPTION_H

/*
 * C interface to the caption-mining pipeline. The core is C++; everything
 * crosses this boundary as opaque handles, C strings and status codes, so
 * the shared library is usable from any language with a C FFI.
 *
 * Typical sequence:
 *
 *   ac_pipeline* p = NULL;
 *   ac_pipeline_open("config.json", &p);
 *   ac_pipeline_set(p, "seed", "7");
 *   ac_status rc = ac_mine(p, "manifest.json", "out/");
 *   if (rc != AC_OK) fprintf(stderr, "%s\n", ac_pipeline_last_error(p));
 *   ac_pipeline_close(p);
 */

#ifdef _WIN32
#ifdef AC_BUILDING
#define AC_API __declspec(dllexport)
#else
#define AC_API __declspec(dllimport)
#endif
#else
#define AC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ac_status {
    AC_OK = 0,
    AC_PARTIAL = 1,      /* some videos failed; outputs for the rest are valid */
    AC_ERR_CONFIG = 2,   /* unusable config or manifest */
    AC_ERR_INVALID_ARG = 3,
    AC_ERR_IO = 4,       /* missing/corrupt inputs or unwritable outputs */
    AC_ERR_PROVIDER = 5, /* model endpoints unreachable or refusing */
    AC_ERR_INTERNAL = 6
} ac_status;

/* Opaque pipeline handle. */
typedef struct ac_pipeline ac_pipeline;

AC_API const char* ac_version(void);

/* Creates a pipeline from a JSON config file; NULL selects the built-in
 * defaults (simulated mode must then be enabled via ac_pipeline_set).
 * The handle must be freed with ac_pipeline_close(). */
AC_API ac_status ac_pipeline_open(const char* config_path, ac_pipeline** out);

AC_API void ac_pipeline_close(ac_pipeline* p);

/* Message for the last failing call on this handle. The pointer stays
 * valid until the next call on the same handle. */
AC_API const char* ac_pipeline_last_error(const ac_pipeline* p);

/* Stringly-typed knobs, applied before the next command: seed, workers,
 * simulated, iterations, c_explore, alpha, beta, frames, beam, beam_size,
 * resume, dedup_threshold, pool_threshold, paraphrase, eval_frames,
 * prompt_profile, model_endpoint, model_name, cache_dir, template_dir. */
AC_API ac_status ac_pipeline_set(ac_pipeline* p, const char* key, const char* value);

/* Screens the manifest's videos and writes the kept subset plus a
 * keep/drop ledger. */
AC_API ac_status ac_screen(ac_pipeline* p, const char* manifest_path,
                           const char* out_manifest_path);

/* Mines key points for every manifest video: per video a tree dump, a
 * key-point pool, a review file and a verdict ledger under out_dir. */
AC_API ac_status ac_mine(ac_pipeline* p, const char* manifest_path, const char* out_dir);

/* Captions each video with the candidate model and scores it against the
 * mined pools; writes per-video records plus a per-model report. */
AC_API ac_status ac_evaluate(ac_pipeline* p, const char* manifest_path, const char* pools_dir,
                             const char* model_name, const char* out_dir);

/* Renders overall/per-category/per-threshold tables from evaluation
 * records, including the rank-stability check across thresholds. */
AC_API ac_status ac_report(ac_pipeline* p, const char* results_dir, const char* out_dir);

/* Builds training samples (thought process + caption) from mined pools. */
AC_API ac_status ac_distill(ac_pipeline* p, const char* manifest_path, const char* pools_dir,
                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* AUTOCAPTION_H */
