#pragma once

#include "lunarmap/catalog.hpp"

namespace lunarmap::testing {

// Record that satisfies every catalog invariant; only the map-relevant
// fields are meaningful.
inline TransferSolution synthetic(std::uint64_t id, double alpha, double beta, double tof_days,
                                  double residual = 1e-10) {
  const SystemConstants c;
  TransferSolution s;
  s.id = id;
  s.params = {alpha, beta, c.canonical_time(tof_days)};
  s.tof_days = s.params.tof * (c.period_days() / kTwoPi);
  s.departure = {0.1, 0.2, 0.3, 0.4};
  s.arrival = {0.9, 0.01, 0.2, -0.1};
  s.dv_i_km_s = 3.1 + 0.001 * static_cast<double>(id % 7);
  s.dv_f_km_s = 0.8;
  s.dv_km_s = s.dv_i_km_s + s.dv_f_km_s;
  s.residual_norm = residual;
  s.insertion_sense = id % 2 == 0 ? 1 : -1;
  s.iterations = 5;
  return s;
}

inline CatalogHeader default_header() {
  CatalogHeader h;
  h.constants_hash = SystemConstants{}.fingerprint();
  h.grid_hash = 42;
  return h;
}

}  // namespace lunarmap::testing
