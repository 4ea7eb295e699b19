/* Syntax-only smoke test: the generated header must stand alone as C11. */
#include "fpp.h"

int fpp_header_smoke(void) {
  FppGeometry *geo = 0;
  FppConfiguration *cfg = 0;
  FppEstimate est;
  uint32_t value = 0;
  size_t vertices = 0, edges = 0, pivotal = 0;
  uint8_t t = 0;

  FppStatus status = fpp_geometry_new(2, 2, &geo);
  if (status != FPP_STATUS_OK) return 1;
  status = fpp_geometry_counts(geo, &vertices, &edges);
  status = fpp_configuration_sample(geo, 0.5, 1, 0, &cfg);
  status = fpp_configuration_time(cfg, 0, &t);
  status = fpp_configuration_flip(cfg, 0);
  status = fpp_phi(cfg, &value);
  status = fpp_pivotal_count(cfg, 1, &pivotal);
  status = fpp_estimate_mu(2, 8, 0.25, 10, 1, &est);
  status = fpp_verify_russo(2, 1, 1, 0);
  status = fpp_verify_pivotal_bounds(2, 1, 1, 0);
  status = fpp_verify_monotonicity(2, 1, 101, 0);
  fpp_configuration_free(cfg);
  fpp_geometry_free(geo);
  return (int)status + (int)*fpp_version() + (int)*fpp_status_message(status);
}
