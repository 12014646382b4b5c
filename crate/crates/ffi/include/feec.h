#ifndef FEEC_H
#define FEEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FEEC_BC_NATURAL 0

#define FEEC_BC_ESSENTIAL 1

#define FEEC_MODE_CRUDE 0

#define FEEC_MODE_SHARP 1

typedef enum {
  FEEC_STATUS_OK = 0,
  FEEC_STATUS_NULL_POINTER = 1,
  FEEC_STATUS_INVALID_ARGUMENT = 2,
  FEEC_STATUS_IO = 3,
  FEEC_STATUS_INVALID_MESH = 4,
  FEEC_STATUS_UNSUPPORTED = 5,
  FEEC_STATUS_NUMERICAL = 6,
  FEEC_STATUS_BUFFER_TOO_SMALL = 7,
  FEEC_STATUS_PANIC = 8,
} FeecStatus;

// Simplicial mesh.
typedef struct FeecMesh FeecMesh;

// Estimator report of one solve.
typedef struct FeecReport FeecReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *feec_version(void);

// Copy the calling thread's last error message into `buf` (truncated to
// `len - 1` bytes and NUL-terminated). Returns the full message length plus
// one, or 0 when the last call succeeded.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t feec_last_error_message(char *buf, size_t len);

// Generate a mesh of a built-in domain (`square`, `l_shape`,
// `square_annulus`, `cube`, `cube_with_tunnel`).
//
// # Safety
// `domain` must be a NUL-terminated string and `out` a valid pointer.
FeecStatus feec_mesh_generate(const char *domain, size_t resolution, FeecMesh **out);

// Read a mesh file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
FeecStatus feec_mesh_read(const char *path, FeecMesh **out);

// Write a mesh file.
//
// # Safety
// `mesh` must come from this library and `path` be a NUL-terminated string.
FeecStatus feec_mesh_write(const FeecMesh *mesh, const char *path);

// Uniformly refine `mesh` into a new handle.
//
// # Safety
// `mesh` must come from this library and `out` be a valid pointer.
FeecStatus feec_mesh_refine_uniform(const FeecMesh *mesh, FeecMesh **out);

// Ambient dimension, vertex count and cell count of `mesh`. Any output
// pointer may be NULL.
//
// # Safety
// `mesh` must come from this library; non-NULL outputs must be valid.
FeecStatus feec_mesh_counts(const FeecMesh *mesh, size_t *dim, size_t *vertices, size_t *cells);

// Release a mesh. NULL is ignored.
//
// # Safety
// `mesh` must be NULL or a handle from this library not yet freed.
void feec_mesh_free(FeecMesh *mesh);

// Dimension of the discrete harmonic `k`-forms and the gap bound `μ`.
//
// # Safety
// `mesh` must come from this library; non-NULL outputs must be valid.
FeecStatus feec_harmonic(const FeecMesh *mesh, size_t k, uint32_t bc, size_t *dim, double *mu);

// Solve a registry problem and evaluate its estimator. `mesh` may be NULL
// for the problem's base mesh.
//
// # Safety
// `problem` must be a NUL-terminated string, `mesh` NULL or a handle from
// this library, and `out` a valid pointer.
FeecStatus feec_estimate(const char *problem,
                         const FeecMesh *mesh,
                         uint32_t mode,
                         FeecReport **out);

// Global quantities of a report: total estimate, `μ`, and the true error
// (NaN when the problem has no exact solution). Any output may be NULL.
//
// # Safety
// `report` must come from this library; non-NULL outputs must be valid.
FeecStatus feec_report_summary(const FeecReport *report, double *total, double *mu, double *error);

// Number of cells of the report's mesh.
//
// # Safety
// `report` must come from this library and `cells` be a valid pointer.
FeecStatus feec_report_num_cells(const FeecReport *report, size_t *cells);

// Copy the per-cell indicators `η(K)` into `eta`, which holds `len` values.
//
// # Safety
// `report` must come from this library and `eta` point to `len` writable
// doubles.
FeecStatus feec_report_indicators(const FeecReport *report, double *eta, size_t len);

// Write the JSON report into `buf`. `required` (may be NULL) receives the
// size needed including the NUL; pass `buf = NULL, len = 0` to query it.
//
// # Safety
// `report` must come from this library, `buf` be NULL or point to `len`
// writable bytes, and `required` be NULL or valid.
FeecStatus feec_report_json(const FeecReport *report, char *buf, size_t len, size_t *required);

// Per-cell indicator table as CSV, with the same buffer protocol as
// [`feec_report_json`].
//
// # Safety
// As for [`feec_report_json`].
FeecStatus feec_report_csv(const FeecReport *report, char *buf, size_t len, size_t *required);

// Release a report. NULL is ignored.
//
// # Safety
// `report` must be NULL or a handle from this library not yet freed.
void feec_report_free(FeecReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEEC_H */
