#include "lunarmap/constants.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "lunarmap/hash.hpp"

namespace lunarmap {

namespace {

double require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + ": non-finite value");
  }
  return value;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

SystemConstants::SystemConstants() : SystemConstants(Values{}) {}

SystemConstants::SystemConstants(const Values& values) : values_(values) {
  if (!(values.mu > 0.0 && values.mu < 0.5)) {
    throw std::invalid_argument("mass parameter mu must lie in (0, 0.5)");
  }
  require_positive(values.length_unit_km, "length unit");
  require_positive(values.period_days, "Earth-Moon period");
  require_positive(values.earth_radius_km, "Earth radius");
  require_positive(values.moon_radius_km, "Moon radius");
  time_unit_days_ = values.period_days / kTwoPi;
  velocity_unit_km_s_ = values.length_unit_km / (time_unit_days_ * kSecondsPerDay);
}

double SystemConstants::canonical_length(double km) const {
  require_finite(km, "length");
  if (km < 0.0) {
    throw std::invalid_argument("length must be non-negative");
  }
  return km / values_.length_unit_km;
}

double SystemConstants::dimensional_length(double lu) const {
  return require_finite(lu, "length") * values_.length_unit_km;
}

double SystemConstants::canonical_velocity(double km_s) const {
  return require_finite(km_s, "velocity") / velocity_unit_km_s_;
}

double SystemConstants::dimensional_velocity(double vu) const {
  return require_finite(vu, "velocity") * velocity_unit_km_s_;
}

double SystemConstants::canonical_time(double days) const {
  return require_finite(days, "time") / time_unit_days_;
}

double SystemConstants::dimensional_time(double tu) const {
  return require_finite(tu, "time") * time_unit_days_;
}

std::uint64_t SystemConstants::fingerprint() const {
  return Fingerprint{}
      .add("constants/v1")
      .add(values_.mu)
      .add(values_.length_unit_km)
      .add(values_.period_days)
      .add(values_.earth_radius_km)
      .add(values_.moon_radius_km)
      .value();
}

}  // namespace lunarmap
