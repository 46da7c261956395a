#include "dpw.h"
#include <math.h>
#include <stdio.h>
#include <string.h>

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,    \
              #cond, dpw_last_error());                          \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  DpwBesselPair pair;
  DpwComplex x = {1.0, 0.0};
  CHECK(dpw_bessel_y0i(x, 0, &pair) == DPW_STATUS_OK);
  /* I0(1) */
  CHECK(fabs(pair.i0.re - 1.2660658777520082) < 1e-14);

  DpwFactorization *f = NULL;
  CHECK(dpw_factorize(1.0, dpw_euler_gamma(), DPW_METHOD_RH, 0, &f) == DPW_STATUS_OK);
  DpwFactorizationInfo info;
  CHECK(dpw_factorization_info(f, &info) == DPW_STATUS_OK);
  CHECK(info.used_rh && info.epsilon == 1 && isfinite(info.v));
  dpw_factorization_free(f);

  CHECK(dpw_factorize(-1.0, 0.5, DPW_METHOD_AUTO, 0, &f) == DPW_STATUS_DOMAIN_ERROR);
  CHECK(strlen(dpw_last_error()) > 0);

  DpwSurfaceParams p;
  CHECK(dpw_surface_params_default(&p) == DPW_STATUS_OK);
  p.nr = 2;
  p.ntheta = 3;
  DpwSurface *s = NULL;
  CHECK(dpw_surface_new(&p, &s) == DPW_STATUS_OK);
  CHECK(dpw_surface_vertex_count(s) == 6 && dpw_surface_face_count(s) == 2);
  double v[18];
  CHECK(dpw_surface_vertices(s, v, 18) == DPW_STATUS_OK);
  CHECK(dpw_surface_vertices(s, v, 17) == DPW_STATUS_BUFFER_TOO_SMALL);
  dpw_surface_free(s);

  printf("ok %s\n", dpw_version());
  return 0;
}
