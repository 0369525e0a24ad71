#ifndef RATSTOKES_H
#define RATSTOKES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every entry point.
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_CONFIG = 2,
  RS_STATUS_SOLVER = 3,
  RS_STATUS_EVALUATION = 4,
  RS_STATUS_PANIC = 5,
} RsStatus;

// Origin of a pole in the rational basis.
typedef enum RsPoleSource {
  RS_POLE_SOURCE_LIGHTNING = 0,
  RS_POLE_SOURCE_AAA = 1,
} RsPoleSource;

// Solved flow; only ever handled through pointers.
typedef struct RsSolution RsSolution;

// Flow quantities at one point.
typedef struct RsFields {
  double psi;
  double u;
  double v;
  double p;
  double omega;
} RsFields;

// Complex number as a real/imaginary pair.
typedef struct RsComplex {
  double re;
  double im;
} RsComplex;

// Goursat functions `f`, `g` and their derivatives at one point.
typedef struct RsGoursat {
  struct RsComplex f;
  struct RsComplex fp;
  struct RsComplex g;
  struct RsComplex gp;
} RsGoursat;

// One pole location.
typedef struct RsPole {
  double x;
  double y;
  enum RsPoleSource source;
} RsPole;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Solves the flow described by a JSON configuration document.
//
// On success `*out` receives a handle to release with [`rs_solution_free`].
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` valid for writing.
enum RsStatus rs_solve_config_json(const char *config_json, struct RsSolution **out);

// Solves a named benchmark case with default parameters, e.g.
// `"two-cylinder-d"`, `"constricted-channel"` or `"bifurcation-ellipse"`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` valid for writing.
enum RsStatus rs_solve_case(const char *name, struct RsSolution **out);

// Evaluates `ψ, u, v, p, ω` at `(x, y)`.
//
// # Safety
// `solution` must be a live handle and `out` valid for writing.
enum RsStatus rs_eval_fields(const struct RsSolution *solution,
                             double x,
                             double y,
                             struct RsFields *out);

// Evaluates the Goursat functions and their derivatives at `(x, y)`.
//
// # Safety
// `solution` must be a live handle and `out` valid for writing.
enum RsStatus rs_eval_goursat(const struct RsSolution *solution,
                              double x,
                              double y,
                              struct RsGoursat *out);

// Accuracy in digits, `−log10` of the maximum boundary error.
//
// # Safety
// `solution` must be a live handle and `out` valid for writing.
enum RsStatus rs_boundary_accuracy_digits(const struct RsSolution *solution, double *out);

// Inlet-to-outlet pressure drop; [`RsStatus::Evaluation`] for cases
// without one.
//
// # Safety
// `solution` must be a live handle and `out` valid for writing.
enum RsStatus rs_pressure_drop(const struct RsSolution *solution, double *out);

// Number of poles (lightning and AAA) in the basis.
//
// # Safety
// `solution` must be a live handle and `out` valid for writing.
enum RsStatus rs_pole_count(const struct RsSolution *solution, size_t *out);

// Copies up to `capacity` poles into `out` and stores the number copied in
// `written`. `out` may be null when `capacity` is zero.
//
// # Safety
// `solution` must be a live handle, `out` valid for `capacity` writes and
// `written` valid for writing.
enum RsStatus rs_poles(const struct RsSolution *solution,
                       struct RsPole *out,
                       size_t capacity,
                       size_t *written);

// Lubrication-theory pressure drop of the constricted channel truncated
// after the `δ^order` term (`order` ∈ {0, 2, 4}).
//
// # Safety
// `out` must be valid for writing.
enum RsStatus rs_elt_pressure_drop(double lambda, double delta, uint32_t order, double *out);

// Releases a solution handle. Null is ignored.
//
// # Safety
// `solution` must be null or a handle not yet freed.
void rs_solution_free(struct RsSolution *solution);

// Message of the last failed call on this thread, or an empty string.
//
// The pointer stays valid until the next `rs_*` call on the same thread.
const char *rs_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RATSTOKES_H */
