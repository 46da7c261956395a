#ifndef DPW_H
#define DPW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DPW_STATUS_OK = 0,
  DPW_STATUS_NULL_POINTER = 1,
  DPW_STATUS_PANIC = 2,
  DPW_STATUS_BUFFER_TOO_SMALL = 3,
  DPW_STATUS_OUT_OF_RANGE = 4,
  DPW_STATUS_TWIST_VIOLATION = 10,
  DPW_STATUS_NON_UNIMODULAR = 11,
  DPW_STATUS_TAIL_TOO_FAT = 12,
  DPW_STATUS_NOT_FACTORIZABLE = 13,
  DPW_STATUS_COMPLEX_THETA = 14,
  DPW_STATUS_SECTOR_VIOLATION = 15,
  DPW_STATUS_DOMAIN_ERROR = 16,
  DPW_STATUS_TRUNCATION_ERROR = 17,
  DPW_STATUS_CUT_CROSSING = 18,
  DPW_STATUS_SINGULAR_SYSTEM = 19,
  DPW_STATUS_INCONSISTENT_SIGN = 20,
  DPW_STATUS_DEGENERATE_FRAME = 21,
  DPW_STATUS_CONFIG = 22,
  DPW_STATUS_IO = 23,
} DpwStatus;

typedef enum {
  // RH route for a = γ, circle route otherwise.
  DPW_METHOD_AUTO = 0,
  DPW_METHOD_RH = 1,
  DPW_METHOD_CIRCLE = 2,
} DpwMethod;

// Global factorization φ = F·w·B at one radius.
typedef struct DpwFactorization DpwFactorization;

typedef struct DpwProfile DpwProfile;

typedef struct DpwSurface DpwSurface;

typedef struct {
  double re;
  double im;
} DpwComplex;

typedef struct {
  DpwComplex i0;
  DpwComplex d_i0;
  DpwComplex y0i;
  DpwComplex d_y0i;
} DpwBesselPair;

typedef struct {
  double r;
  double a;
  // Metric exponent: B(0) = diag(e^{v/2}, e^{−v/2}).
  double v;
  int32_t epsilon;
  bool w_case;
  // True when the RH route produced the result.
  bool used_rh;
  // Circle samples of F and B.
  size_t n;
  double reconstruction_defect;
  double unitarity_defect;
} DpwFactorizationInfo;

typedef struct {
  double r_min;
  double r_max;
  double theta_min;
  double theta_max;
  size_t nr;
  size_t ntheta;
  // Point of the associated family, on the unit circle.
  DpwComplex lambda0;
  // Mean curvature.
  double h;
  double a;
  // Circle samples per frame.
  size_t n;
  double dr;
  double dtheta;
  // Half-width of the difference stencil.
  size_t stencil;
} DpwSurfaceParams;

typedef struct {
  double max_conformality;
  double max_mean_curvature_error;
  double max_metric_theta_variation;
  double max_lie_defect;
  double max_imag;
} DpwSurfaceStats;

typedef struct {
  double x;
  double r;
  // False when the factorization failed at this node; u and v are NaN.
  bool ok;
  double u;
  double v;
  // NaN at the stencil ends and next to failed nodes.
  double residual;
} DpwProfileNode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `dpw_*` call on this thread.
const char *dpw_last_error(void);

// Static, NUL-terminated crate version.
const char *dpw_version(void);

// Euler's constant, the default dressing parameter.
double dpw_euler_gamma(void);

// I₀(x), Y₀(ix) and their x-derivatives at `x` on sheet `sheet` of the
// logarithmic cover.
//
// # Safety
// `out` must point to writable memory for one `DpwBesselPair`.
DpwStatus dpw_bessel_y0i(DpwComplex x, int64_t sheet, DpwBesselPair *out);

// Factorizes at z = r for parameter `a` with `n` circle samples (0 picks
// the default).
//
// # Safety
// `out` must point to writable memory for one handle pointer. On success the
// handle must be released with [`dpw_factorization_free`].
DpwStatus dpw_factorize(double r, double a, DpwMethod method, size_t n, DpwFactorization **out);

// # Safety
// `h` must be a live handle from [`dpw_factorize`] and `out` writable.
DpwStatus dpw_factorization_info(const DpwFactorization *h, DpwFactorizationInfo *out);

// Evaluates F (`which` = 0) or B (`which` = 1) at λ from its Laurent
// coefficients, writing the four entries row-major into `out`.
//
// # Safety
// `h` must be a live handle and `out` must have room for four `DpwComplex`.
DpwStatus dpw_factorization_eval(const DpwFactorization *h,
                                 uint32_t which,
                                 DpwComplex lambda,
                                 DpwComplex *out);

// # Safety
// `h` must be null or a handle from [`dpw_factorize`] not freed before.
void dpw_factorization_free(DpwFactorization *h);

// Fills `out` with the default mesh parameters.
//
// # Safety
// `out` must point to writable memory for one `DpwSurfaceParams`.
DpwStatus dpw_surface_params_default(DpwSurfaceParams *out);

// Builds the nr×ntheta mesh.
//
// # Safety
// `params` must be readable and `out` writable. On success the handle must
// be released with [`dpw_surface_free`].
DpwStatus dpw_surface_new(const DpwSurfaceParams *params, DpwSurface **out);

// # Safety
// `h` must be a live handle from [`dpw_surface_new`].
size_t dpw_surface_vertex_count(const DpwSurface *h);

// # Safety
// `h` must be a live handle from [`dpw_surface_new`].
size_t dpw_surface_face_count(const DpwSurface *h);

// Copies the vertices as (x1, x2, x0) triples into `buf`, which holds `len`
// doubles; `len` must be at least three times the vertex count.
//
// # Safety
// `h` must be a live handle and `buf` writable for `len` doubles.
DpwStatus dpw_surface_vertices(const DpwSurface *h, double *buf, size_t len);

// Copies the quads as 0-based vertex indices into `buf`, which holds `len`
// entries; `len` must be at least four times the face count.
//
// # Safety
// `h` must be a live handle and `buf` writable for `len` values.
DpwStatus dpw_surface_faces(const DpwSurface *h, uint32_t *buf, size_t len);

// # Safety
// `h` must be a live handle and `out` writable.
DpwStatus dpw_surface_stats(const DpwSurface *h, DpwSurfaceStats *out);

// Writes the mesh as Wavefront OBJ to the UTF-8 path `path`.
//
// # Safety
// `h` must be a live handle and `path` a NUL-terminated string.
DpwStatus dpw_surface_write_obj(const DpwSurface *h, const char *path);

// # Safety
// `h` must be null or a handle from [`dpw_surface_new`] not freed before.
void dpw_surface_free(DpwSurface *h);

// sinh-Gordon profile on `points` log-spaced radii in [r_min, r_max].
// Node failures do not fail the call; inspect `ok` per node.
//
// # Safety
// `out` must be writable. On success the handle must be released with
// [`dpw_profile_free`].
DpwStatus dpw_profile_new(double r_min, double r_max, size_t points, double a, DpwProfile **out);

// # Safety
// `h` must be a live handle from [`dpw_profile_new`].
size_t dpw_profile_len(const DpwProfile *h);

// # Safety
// `h` must be a live handle and `out` writable.
DpwStatus dpw_profile_node(const DpwProfile *h, size_t i, DpwProfileNode *out);

// # Safety
// `h` must be null or a handle from [`dpw_profile_new`] not freed before.
void dpw_profile_free(DpwProfile *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPW_H */
