#ifndef HEARTWIN_H
#define HEARTWIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HW_SHAPE_RECTANGULAR 0

#define HW_SHAPE_TRIANGULAR 1

#define HW_SHAPE_GAUSSIAN 2

/**
 * Columns of every feature matrix.
 */
#define HW_NUM_FEATURES 10

typedef enum HwStatus {
  HW_STATUS_OK = 0,
  HW_STATUS_NULL_POINTER = 1,
  HW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * File missing, unreadable or malformed.
   */
  HW_STATUS_IO = 3,
  /**
   * The pipeline rejected the input (bad window, too short a signal, ...).
   */
  HW_STATUS_DOMAIN = 4,
  HW_STATUS_BUFFER_TOO_SMALL = 5,
  HW_STATUS_PANIC = 6,
} HwStatus;

/**
 * A `rows x HW_NUM_FEATURES` feature matrix.
 */
typedef struct HwFeatures HwFeatures;

/**
 * A trained classifier.
 */
typedef struct HwModel HwModel;

/**
 * Percentages; NaN where the denominator is zero.
 */
typedef struct HwMetrics {
  double sensitivity;
  double specificity;
  double accuracy;
} HwMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *hw_last_error_message(void);

/**
 * Writes the `l + 1` coefficients of a window.
 *
 * # Safety
 * `out` must hold `capacity` doubles; `written` may be null.
 */
enum HwStatus hw_window_coefficients(uint32_t shape,
                                     size_t l,
                                     double alpha,
                                     double *out,
                                     size_t capacity,
                                     size_t *written);

/**
 * Filters, decimates to 500 Hz and fixes the length to 5000 samples.
 *
 * # Safety
 * `samples` must hold `n` doubles and `out` `capacity` doubles.
 */
enum HwStatus hw_preprocess(const double *samples,
                            size_t n,
                            uint32_t rate_hz,
                            double *out,
                            size_t capacity,
                            size_t *written);

/**
 * Frames an (already preprocessed) signal and extracts its feature matrix,
 * optionally z-scored per column.
 *
 * # Safety
 * `samples` must hold `n` doubles; `out` must be a valid pointer.
 */
enum HwStatus hw_features_extract(const double *samples,
                                  size_t n,
                                  uint32_t shape,
                                  size_t l,
                                  double alpha,
                                  size_t hop,
                                  size_t bins,
                                  bool normalize,
                                  struct HwFeatures **out);

/**
 * Builds a feature matrix from `rows * HW_NUM_FEATURES` row-major values.
 *
 * # Safety
 * `values` must hold `rows * HW_NUM_FEATURES` doubles.
 */
enum HwStatus hw_features_from_rows(const double *values, size_t rows, struct HwFeatures **out);

/**
 * Number of rows (frames); 0 for a null handle.
 *
 * # Safety
 * `features` must be null or a live handle.
 */
size_t hw_features_rows(const struct HwFeatures *features);

/**
 * Copies the matrix row-major.
 *
 * # Safety
 * `features` must be a live handle and `out` hold `capacity` doubles.
 */
enum HwStatus hw_features_copy(const struct HwFeatures *features,
                               double *out,
                               size_t capacity,
                               size_t *written);

/**
 * # Safety
 * `features` must be null or a handle not yet freed.
 */
void hw_features_free(struct HwFeatures *features);

/**
 * Loads a model file written by `heartwin train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum HwStatus hw_model_load(const char *path, struct HwModel **out);

/**
 * Hidden units per direction; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t hw_model_hidden_size(const struct HwModel *model);

/**
 * Classifies one feature matrix. `class_out` receives 0 (healthy) or 1
 * (pathological); `probs_out`, if not null, receives two probabilities.
 *
 * # Safety
 * Handles must be live; `class_out` valid; `probs_out` null or room for 2.
 */
enum HwStatus hw_model_predict(const struct HwModel *model,
                               const struct HwFeatures *features,
                               uint32_t *class_out,
                               double *probs_out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void hw_model_free(struct HwModel *model);

/**
 * Sensitivity, specificity and accuracy from confusion counts, with
 * pathological as the positive class.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HwStatus hw_metrics(uint64_t tp,
                         uint64_t tn,
                         uint64_t fp,
                         uint64_t fn_count,
                         struct HwMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEARTWIN_H */
