#ifndef FRACSIV_H
#define FRACSIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_ARGUMENT = 2,
  FS_STATUS_CONFIG_ERROR = 3,
  FS_STATUS_SOLVER_FAILURE = 4,
  FS_STATUS_IO_ERROR = 5,
  FS_STATUS_BUFFER_TOO_SMALL = 6,
  FS_STATUS_PANIC = 7,
} FsStatus;

/**
 * Opaque simulation handle.
 */
typedef struct FsSimulation FsSimulation;

/**
 * Plain-data scheme and model configuration.
 */
typedef struct FsConfig {
  double alpha1;
  double alpha2;
  double r1;
  double r2;
  double dt;
  /**
   * Grid intervals along x.
   */
  uint32_t nx;
  /**
   * Grid intervals along y.
   */
  uint32_t ny;
  double x_lo;
  double x_hi;
  double y_lo;
  double y_hi;
  double mu;
  double beta;
  double gamma;
  double theta;
  double nu;
  /**
   * x diffusion coefficients of S, I, V.
   */
  double diffusion_x[3];
  /**
   * y diffusion coefficients of S, I, V.
   */
  double diffusion_y[3];
} FsConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Fills `out` with the built-in demo configuration.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `FsConfig`.
 */
enum FsStatus fs_config_default(struct FsConfig *out);

/**
 * Writes the first `count` Grünwald weights of order `alpha` into `out`.
 *
 * # Safety
 * `out` must be null or point to `count` writable doubles.
 */
enum FsStatus fs_grunwald_weights(double alpha, size_t count, double *out);

/**
 * Creates a simulation with an all-zero state at `t = 0`.
 *
 * # Safety
 * `cfg` must be null or point to a valid `FsConfig`; `out` must be null or
 * writable. On success `*out` must later be released with [`fs_simulation_free`].
 */
enum FsStatus fs_simulation_new(const struct FsConfig *cfg, struct FsSimulation **out);

/**
 * Creates a simulation from a scenario file, initialised with its initial state.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` as in [`fs_simulation_new`].
 */
enum FsStatus fs_simulation_from_file(const char *path, struct FsSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle not yet freed.
 */
void fs_simulation_free(struct FsSimulation *sim);

/**
 * Resets the state to the central-seed initial condition and the time to 0.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
enum FsStatus fs_simulation_seed(struct FsSimulation *sim);

/**
 * Advances `steps` time steps. On failure the state is left at the last good step.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
enum FsStatus fs_simulation_step(struct FsSimulation *sim, uint64_t steps);

/**
 * # Safety
 * `sim` must be null or a live handle; `out` null or writable.
 */
enum FsStatus fs_simulation_time(const struct FsSimulation *sim, double *out);

/**
 * Number of grid points along x and y (intervals plus one).
 *
 * # Safety
 * `sim` must be null or a live handle; `points_x`, `points_y` null or writable.
 */
enum FsStatus fs_simulation_dims(const struct FsSimulation *sim,
                                 size_t *points_x,
                                 size_t *points_y);

/**
 * Copies compartment `c` (0 = S, 1 = I, 2 = V) row-major in y into `buf`.
 *
 * # Safety
 * `sim` must be null or a live handle; `buf` null or `len` writable doubles.
 */
enum FsStatus fs_simulation_copy_field(const struct FsSimulation *sim,
                                       uint32_t c,
                                       double *buf,
                                       size_t len);

/**
 * Overwrites compartment `c` from `buf`, which must hold exactly one value per grid point.
 *
 * # Safety
 * `sim` must be null or a live handle; `buf` null or `len` readable doubles.
 */
enum FsStatus fs_simulation_set_field(struct FsSimulation *sim,
                                      uint32_t c,
                                      const double *buf,
                                      size_t len);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to fit) and returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fs_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSIV_H */
