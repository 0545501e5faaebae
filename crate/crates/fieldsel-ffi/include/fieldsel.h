#ifndef FIELDSEL_H
#define FIELDSEL_H

/* Generated by cbindgen from fieldsel-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_ARGUMENT = 1,
  FS_STATUS_INVALID_ARGUMENT = 2,
  FS_STATUS_CAPACITY_EXCEEDED = 3,
  FS_STATUS_PARSE_ERROR = 4,
  FS_STATUS_UNSUPPORTED = 5,
  FS_STATUS_EMPTY_COLLECTION = 6,
  FS_STATUS_NO_JUMP = 7,
  FS_STATUS_IO_ERROR = 8,
  FS_STATUS_INVALID_UTF8 = 9,
  FS_STATUS_INTERNAL_PANIC = 10,
} FsStatus;

/**
 * Opaque sample-batch handle; remembers the sites and alphabet it was
 * drawn against.
 */
typedef struct FsBatch FsBatch;

/**
 * Opaque fitted empirical measure.
 */
typedef struct FsEmpirical FsEmpirical;

/**
 * Opaque ground-truth model handle.
 */
typedef struct FsModel FsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread. The pointer stays valid
 * until the thread's next call into this library.
 */
const char *fs_last_error(void);

/**
 * Parse a model description file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
FsStatus fs_model_from_file(const char *path, FsModel **out);

/**
 * Build an Ising model on a grid with one coupling on every
 * nearest-neighbour edge.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
FsStatus fs_model_ising_grid(uint32_t rows, uint32_t cols, double coupling, FsModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library, not yet freed.
 */
void fs_model_free(FsModel *model);

/**
 * Number of observed sites; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uint32_t fs_model_site_count(const FsModel *model);

/**
 * Dense index of a site label.
 *
 * # Safety
 * Pointers must be valid; `model` must be a live handle.
 */
FsStatus fs_model_site_index(const FsModel *model, const char *label, uint32_t *out);

/**
 * Joint probability of a complete configuration given as raw symbol values.
 *
 * # Safety
 * Pointers must be valid; `symbols` must hold `len` entries.
 */
FsStatus fs_model_joint_probability(const FsModel *model,
                                    const int64_t *symbols,
                                    uintptr_t len,
                                    double *out);

/**
 * Exact conditional probability of the target site given the other sites
 * of `subset_mask` (which must contain the target).
 *
 * # Safety
 * Pointers must be valid; `symbols` must hold `len` entries.
 */
FsStatus fs_model_conditional(const FsModel *model,
                              uint32_t site,
                              uint32_t subset_mask,
                              const int64_t *symbols,
                              uintptr_t len,
                              double *out);

/**
 * Closed-form one-point conditional of a pairwise spin model.
 *
 * # Safety
 * Pointers must be valid; `symbols` must hold `len` entries.
 */
FsStatus fs_model_closed_form_conditional(const FsModel *model,
                                          uint32_t site,
                                          const int64_t *symbols,
                                          uintptr_t len,
                                          double *out);

/**
 * Draw `n` i.i.d. configurations; reproducible for fixed `(seed, stream)`.
 *
 * # Safety
 * Pointers must be valid; `model` must be a live handle.
 */
FsStatus fs_model_sample(const FsModel *model,
                         uint64_t n,
                         uint64_t seed,
                         uint64_t stream,
                         FsBatch **out);

/**
 * # Safety
 * `batch` must be null or a live handle.
 */
void fs_batch_free(FsBatch *batch);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `batch` must be null or a live handle.
 */
uint64_t fs_batch_len(const FsBatch *batch);

/**
 * Aggregate a batch into an empirical measure.
 *
 * # Safety
 * Pointers must be valid; `batch` must be a live handle.
 */
FsStatus fs_empirical_fit(const FsBatch *batch, FsEmpirical **out);

/**
 * # Safety
 * `em` must be null or a live handle.
 */
void fs_empirical_free(FsEmpirical *em);

/**
 * Empirical conditional with the uniform convention on unseen contexts.
 *
 * # Safety
 * Pointers must be valid; `symbols` must hold `len` entries.
 */
FsStatus fs_empirical_conditional(const FsEmpirical *em,
                                  uint32_t site,
                                  uint32_t subset_mask,
                                  const int64_t *symbols,
                                  uintptr_t len,
                                  double *out);

/**
 * Quadratic-criterion selection over all neighborhoods of `site` with
 * cardinality at most `max_cardinality`; the penalty is
 * `penalty_constant · a^v / n`. Writes the chosen subset's bitmask.
 *
 * # Safety
 * Pointers must be valid; `em` must be a live handle.
 */
FsStatus fs_select_l2(const FsEmpirical *em,
                      uint32_t site,
                      uint32_t max_cardinality,
                      double penalty_constant,
                      uint32_t *out_mask);

/**
 * Küllback-criterion selection over the mass-and-conditional filtered
 * collection. Pass a negative `p_star` for the default floor `1/ln n`.
 *
 * # Safety
 * Pointers must be valid; `em` must be a live handle.
 */
FsStatus fs_select_kl(const FsEmpirical *em,
                      uint32_t site,
                      uint32_t max_cardinality,
                      double penalty_constant,
                      double lambda,
                      double delta,
                      double p_star,
                      uint32_t *out_mask);

/**
 * Slope-heuristic calibration with the `a^v/n` complexity over a uniform
 * grid of `k_count` constants on `[k_lo, k_hi]`. Writes the selected
 * subset's bitmask and the detected minimal constant and jump size (NaN
 * when the path never moved).
 *
 * # Safety
 * Pointers must be valid; `em` must be a live handle.
 */
FsStatus fs_calibrate(const FsEmpirical *em,
                      uint32_t site,
                      uint32_t max_cardinality,
                      double k_lo,
                      double k_hi,
                      uint32_t k_count,
                      uint32_t *out_mask,
                      double *out_k_min,
                      double *out_jump);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIELDSEL_H */
