/* lvad — Lorentz-model point cloud video anomaly detection.
 *
 * C API of the shared library. All functions return lvad_status; LVAD_OK is
 * zero. On failure, lvad_last_error() returns a thread-local message with
 * detail. Handles are opaque and must be released with their _free function.
 */
#ifndef LVAD_H
#define LVAD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LVAD_API __declspec(dllexport)
#else
#define LVAD_API __attribute__((visibility("default")))
#endif

typedef enum lvad_status {
  LVAD_OK = 0,
  LVAD_E_INVALID_ARGUMENT = 1,
  LVAD_E_INVALID_DIMENSION = 2,
  LVAD_E_INVALID_CURVATURE = 3,
  LVAD_E_INVALID_TANGENT = 4,
  LVAD_E_NOT_ON_MANIFOLD = 5,
  LVAD_E_NUMERICAL_DOMAIN = 6,
  LVAD_E_NOT_TIMELIKE = 7,
  LVAD_E_INVALID_FRAME = 8,
  LVAD_E_INVALID_WINDOW = 9,
  LVAD_E_INVALID_CONFIG = 10,
  LVAD_E_NON_FINITE_GRADIENT = 11,
  LVAD_E_DEGENERATE_LABELS = 12,
  LVAD_E_EMPTY_FRAME = 13,
  LVAD_E_UNSUPPORTED_VERSION = 14,
  LVAD_E_CORRUPT_FILE = 15,
  LVAD_E_DATA_NOT_FOUND = 16,
  LVAD_E_INCOMPATIBLE_CHECKPOINT = 17,
  LVAD_E_IO = 18,
  LVAD_E_INTERNAL = 19
} lvad_status;

LVAD_API const char* lvad_status_name(lvad_status status);

/* Thread-local message describing the most recent failure on this thread. */
LVAD_API const char* lvad_last_error(void);

LVAD_API const char* lvad_version(void);

/* ---- Experiment configuration ------------------------------------------ */

typedef struct lvad_config_s lvad_config;

LVAD_API lvad_status lvad_config_load(const char* path, lvad_config** out);
LVAD_API lvad_status lvad_config_parse(const char* text, lvad_config** out);
LVAD_API lvad_status lvad_config_default(lvad_config** out);
LVAD_API void lvad_config_free(lvad_config* cfg);

/* Overrides the training seed from the file. */
LVAD_API lvad_status lvad_config_set_seed(lvad_config* cfg, uint64_t seed);

/* Trainable parameter counts; caller frees *text with lvad_string_free. */
LVAD_API lvad_status lvad_config_report_params(const lvad_config* cfg, char** text);

LVAD_API void lvad_string_free(char* text);

/* ---- Workflows ----------------------------------------------------------
 * These mirror the CLI verbs: gen-data, train, score, eval, check-grad.
 */

LVAD_API lvad_status lvad_gen_data(const lvad_config* cfg, const char* out_dir);

LVAD_API lvad_status lvad_train(const lvad_config* cfg, const char* data_dir,
                                const char* checkpoint_out, const char* log_out);

LVAD_API lvad_status lvad_score(const lvad_config* cfg, const char* checkpoint_path,
                                const char* data_dir, const char* split, const char* out_dir);

/* data_dir may be NULL; it enables the per-category breakdown. Either output
 * pointer may be NULL. */
LVAD_API lvad_status lvad_eval(const char* scores_dir, const char* data_dir,
                               const char* report_out, double* auroc_raw, double* auroc_smoothed);

/* Verifies reverse-mode gradients against central differences on a seeded
 * instance of the configured model. Caller frees *report_text. */
LVAD_API lvad_status lvad_check_grad(const lvad_config* cfg, double fd_step, char** report_text,
                                     double* max_rel_err);

/* ---- Building blocks ---------------------------------------------------- */

/* Rank-based AUROC with midrank ties; labels are 0/1 bytes. */
LVAD_API lvad_status lvad_auroc(const double* scores, const uint8_t* labels, size_t n,
                                double* out);

/* Truncated-window moving average; out must hold n doubles. */
LVAD_API lvad_status lvad_moving_average(const double* raw, size_t n, int window, double* out);

/* Converts a depth-image directory (intrinsics.txt + frame_*.bin rasters,
 * optional labels.txt) into a sequence file at out_path. */
LVAD_API lvad_status lvad_ingest_depth(const char* depth_dir, const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LVAD_H */
