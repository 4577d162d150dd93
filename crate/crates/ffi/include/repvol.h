#ifndef REPVOL_H
#define REPVOL_H

/* Generated by cbindgen from repvol-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirrored by the CLI's exit-code discipline.
 */
typedef enum RvStatus {
  RV_STATUS_OK = 0,
  RV_STATUS_INVALID_ARGUMENT = 1,
  RV_STATUS_PARSE_ERROR = 2,
  RV_STATUS_NO_SOLUTION = 3,
  RV_STATUS_RELATOR_GATE = 4,
  RV_STATUS_NUMERIC_ERROR = 5,
} RvStatus;

typedef struct RvRepresentation RvRepresentation;

typedef struct RvTriangulation RvTriangulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rv_last_error_message(void);

/**
 * Parses a TRIG JSON document into a triangulation handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the handle and must be released with
 * `rv_triangulation_free`.
 */
enum RvStatus rv_triangulation_parse(const char *json, struct RvTriangulation **out);

/**
 * # Safety
 * `t` must be a handle from `rv_triangulation_parse`, not yet freed.
 */
void rv_triangulation_free(struct RvTriangulation *t);

/**
 * # Safety
 * `t` must be a live triangulation handle.
 */
uintptr_t rv_tet_count(const struct RvTriangulation *t);

/**
 * # Safety
 * `t` must be a live triangulation handle.
 */
uintptr_t rv_cusp_count(const struct RvTriangulation *t);

/**
 * # Safety
 * `t` must be a live triangulation handle.
 */
uintptr_t rv_edge_class_count(const struct RvTriangulation *t);

/**
 * # Safety
 * `t` must be a live triangulation handle.
 */
uintptr_t rv_generator_count(const struct RvTriangulation *t);

/**
 * Solves the gluing equations from the regular starting point.
 *
 * `fillings` is either NULL (use the file's filling spec) or an array of
 * 2 * cusp_count integers, the slope (p, q) per cusp with (0, 0) meaning
 * unfilled. `shapes_out` receives 2 * tet_count doubles (re, im per
 * tetrahedron); `volume_out` and `residual_out` may be NULL.
 *
 * # Safety
 * Pointers must be valid for the sizes described above.
 */
enum RvStatus rv_solve(const struct RvTriangulation *t,
                       const int64_t *fillings,
                       double *shapes_out,
                       double *volume_out,
                       double *residual_out);

/**
 * Total signed volume of a shape vector (2 * tet_count interleaved doubles).
 *
 * # Safety
 * `shapes` must point to 2 * tet_count doubles.
 */
enum RvStatus rv_shapes_volume(const struct RvTriangulation *t,
                               const double *shapes,
                               double *volume_out);

/**
 * Develops a shape solution into a representation handle.
 *
 * # Safety
 * `shapes` must point to 2 * tet_count doubles satisfying the edge
 * equations; `out` must be valid and is owned by the caller on success.
 */
enum RvStatus rv_develop(const struct RvTriangulation *t,
                         const double *shapes,
                         struct RvRepresentation **out);

/**
 * Parses a representation JSON document against a triangulation.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be valid.
 */
enum RvStatus rv_representation_parse(const struct RvTriangulation *t,
                                      const char *json,
                                      struct RvRepresentation **out);

/**
 * # Safety
 * `r` must be a handle from `rv_develop`/`rv_representation_parse`.
 */
void rv_representation_free(struct RvRepresentation *r);

/**
 * # Safety
 * `r` must be a live representation handle.
 */
double rv_relator_residual(const struct RvRepresentation *r);

/**
 * Straightened volume of a representation. `repelling` selects the
 * fixed-point policy (0 attracting, nonzero repelling).
 *
 * # Safety
 * Handles must be live; `volume_out` must be valid.
 */
enum RvStatus rv_straighten_volume(const struct RvTriangulation *t,
                                   const struct RvRepresentation *r,
                                   int32_t repelling,
                                   double *volume_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REPVOL_H */
