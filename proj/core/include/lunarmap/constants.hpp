#pragma once

#include <cstdint>

namespace lunarmap {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSecondsPerDay = 86400.0;

/// Physical constants of the Earth–Moon system and the canonical unit set
/// derived from them (LU = Earth–Moon distance, TU = period / 2π, VU = LU/TU).
///
/// Immutable once constructed; every other module works in canonical units
/// and uses this type only at the dimensional boundary.
class SystemConstants {
 public:
  struct Values {
    double mu = 0.0121505856;
    double length_unit_km = 384400.0;
    double period_days = 27.321582;
    double earth_radius_km = 6378.145;
    double moon_radius_km = 1737.1;
  };

  /// Standard Earth–Moon set.
  SystemConstants();
  /// Throws std::invalid_argument unless 0 < mu < 0.5 and all lengths/periods
  /// are positive and finite.
  explicit SystemConstants(const Values& values);

  const Values& values() const { return values_; }
  double mu() const { return values_.mu; }
  double length_unit_km() const { return values_.length_unit_km; }
  double period_days() const { return values_.period_days; }
  double time_unit_days() const { return time_unit_days_; }
  double time_unit_seconds() const { return time_unit_days_ * kSecondsPerDay; }
  double velocity_unit_km_s() const { return velocity_unit_km_s_; }
  double earth_radius_km() const { return values_.earth_radius_km; }
  double moon_radius_km() const { return values_.moon_radius_km; }

  /// Earth and Moon radii in LU.
  double earth_radius() const { return values_.earth_radius_km / values_.length_unit_km; }
  double moon_radius() const { return values_.moon_radius_km / values_.length_unit_km; }

  /// km -> LU. Throws std::invalid_argument for negative or non-finite input.
  double canonical_length(double km) const;
  double dimensional_length(double lu) const;

  /// km/s <-> VU. Non-finite input throws.
  double canonical_velocity(double km_s) const;
  double dimensional_velocity(double vu) const;

  /// days <-> TU. Non-finite input throws.
  double canonical_time(double days) const;
  double dimensional_time(double tu) const;

  /// Stable 64-bit fingerprint of the constant set, used to tag catalogs and
  /// checkpoints so data from different configurations is never mixed.
  std::uint64_t fingerprint() const;

 private:
  Values values_;
  double time_unit_days_;
  double velocity_unit_km_s_;
};

}  // namespace lunarmap
