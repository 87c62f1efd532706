#ifndef MHDBL_H
#define MHDBL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MhdblStatus {
  MHDBL_STATUS_OK = 0,
  MHDBL_STATUS_NULL_POINTER = 1,
  MHDBL_STATUS_INVALID_UTF8 = 2,
  MHDBL_STATUS_CONFIG = 3,
  MHDBL_STATUS_T_STAR_REACHED = 4,
  MHDBL_STATUS_DIVERGENCE = 5,
  MHDBL_STATUS_IO = 6,
  MHDBL_STATUS_CHECKPOINT = 7,
  MHDBL_STATUS_NUMERICAL = 8,
  MHDBL_STATUS_PANIC = 9,
} MhdblStatus;

// Opaque simulation handle.
typedef struct MhdblSim MhdblSim;

// One row of the norm time series.
typedef struct MhdblSample {
  double t;
  double theta;
  double radius;
  double norm_ub;
  double norm_gh;
  double norm_dy_gh;
  double norm_phipsi;
  double cl_dyub_sq;
} MhdblSample;

// Decay exponents; a `has_*` flag of 0 means κ is outside that branch.
typedef struct MhdblExponents {
  uint8_t has_l_kappa;
  double l_kappa;
  uint8_t has_ell_kappa;
  double ell_kappa;
} MhdblExponents;

typedef struct MhdblSupConstants {
  double sup1;
  double argmax1;
  double sup2;
} MhdblSupConstants;

typedef struct MhdblFit {
  double exponent;
  double stderr;
  uint64_t samples;
} MhdblFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread (empty after a success).
// Valid until the next call into the library on this thread.
const char *mhdbl_last_error(void);

// Builds a simulation from `key = value` config text.
//
// # Safety
// `config` must be a NUL-terminated string; `out` must be writable.
enum MhdblStatus mhdbl_sim_new(const char *config, struct MhdblSim **out);

// Releases a handle; null is ignored.
//
// # Safety
// `sim` must come from this library and not be used afterwards.
void mhdbl_sim_free(struct MhdblSim *sim);

// Takes `steps` steps of the size chosen by the step policy.
//
// # Safety
// `sim` must be a live handle.
enum MhdblStatus mhdbl_sim_step(struct MhdblSim *sim, uint64_t steps);

// Advances to time `t`, recording samples on the configured interval.
//
// # Safety
// `sim` must be a live handle.
enum MhdblStatus mhdbl_sim_run_until(struct MhdblSim *sim, double t);

// # Safety
// `sim` must be a live handle; `out` must be writable.
enum MhdblStatus mhdbl_sim_time(const struct MhdblSim *sim, double *out);

// # Safety
// `sim` must be a live handle; `out` must be writable.
enum MhdblStatus mhdbl_sim_theta(const struct MhdblSim *sim, double *out);

// # Safety
// `sim` must be a live handle; `out` must be writable.
enum MhdblStatus mhdbl_sim_sample_count(const struct MhdblSim *sim, uint64_t *out);

// Copies sample `index` of the norm series.
//
// # Safety
// `sim` must be a live handle; `out` must be writable.
enum MhdblStatus mhdbl_sim_sample(const struct MhdblSim *sim,
                                  uint64_t index,
                                  struct MhdblSample *out);

// # Safety
// `sim` must be a live handle; `path` a NUL-terminated string.
enum MhdblStatus mhdbl_sim_save_checkpoint(const struct MhdblSim *sim, const char *path);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum MhdblStatus mhdbl_sim_load_checkpoint(const char *path, struct MhdblSim **out);

// # Safety
// `out` must be writable.
enum MhdblStatus mhdbl_derived_exponents(double kappa, struct MhdblExponents *out);

// # Safety
// `out` must be writable.
enum MhdblStatus mhdbl_sup_constants(struct MhdblSupConstants *out);

// Least-squares fit of `values ≈ C⟨t⟩^p` over `[t_start, t_end]`.
//
// # Safety
// `times` and `values` must point to `n` readable doubles; `out` must be writable.
enum MhdblStatus mhdbl_fit_decay(const double *times,
                                 const double *values,
                                 size_t n,
                                 double t_start,
                                 double t_end,
                                 struct MhdblFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHDBL_H */
