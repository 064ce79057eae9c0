#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lunarmap/constants.hpp"

using namespace lunarmap;

TEST(Constants, DerivedUnits) {
  const SystemConstants c;
  const double tu_days = 27.321582 / (2.0 * 3.14159265358979323846);
  EXPECT_NEAR(c.time_unit_days(), tu_days, 1e-15);
  EXPECT_NEAR(c.time_unit_days(), 4.348, 1e-3);
  const double vu = 384400.0 / (tu_days * 86400.0);
  EXPECT_NEAR(c.velocity_unit_km_s(), vu, 1e-14);
  EXPECT_NEAR(c.velocity_unit_km_s(), 1.0232, 1e-4);
  EXPECT_DOUBLE_EQ(c.earth_radius(), 6378.145 / 384400.0);
  EXPECT_DOUBLE_EQ(c.moon_radius(), 1737.1 / 384400.0);
}

TEST(Constants, TenPiTimeUnitsIsFiveSiderealMonths) {
  const SystemConstants c;
  const double days = c.dimensional_time(10.0 * kPi);
  EXPECT_NEAR(days, 5.0 * 27.321582, 1e-10);
  EXPECT_NEAR(days, 136.58, 0.5);
}

TEST(Constants, ConversionsRoundTrip) {
  const SystemConstants c;
  for (double v : {0.0, 1.0, 3.8466, 384400.0, 1e-6}) {
    EXPECT_NEAR(c.dimensional_length(c.canonical_length(v)), v, 1e-12 * (1.0 + v));
    EXPECT_NEAR(c.dimensional_velocity(c.canonical_velocity(v)), v, 1e-12 * (1.0 + v));
    EXPECT_NEAR(c.dimensional_time(c.canonical_time(v)), v, 1e-12 * (1.0 + v));
  }
  EXPECT_DOUBLE_EQ(c.canonical_length(384400.0), 1.0);
  EXPECT_DOUBLE_EQ(c.canonical_time(c.time_unit_days()), 1.0);
}

TEST(Constants, RejectsBadInput) {
  const SystemConstants c;
  EXPECT_THROW(c.canonical_length(-1.0), std::invalid_argument);
  EXPECT_THROW(c.canonical_length(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  EXPECT_THROW(c.canonical_time(std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(c.dimensional_velocity(std::numeric_limits<double>::quiet_NaN()),
               std::invalid_argument);

  SystemConstants::Values v;
  v.mu = 0.6;
  EXPECT_THROW(SystemConstants{v}, std::invalid_argument);
  v = {};
  v.period_days = 0.0;
  EXPECT_THROW(SystemConstants{v}, std::invalid_argument);
  v = {};
  v.moon_radius_km = -3.0;
  EXPECT_THROW(SystemConstants{v}, std::invalid_argument);
}

TEST(Constants, FingerprintTracksValues) {
  const SystemConstants a;
  const SystemConstants b;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  SystemConstants::Values v;
  v.mu = std::nextafter(v.mu, 1.0);
  EXPECT_NE(SystemConstants(v).fingerprint(), a.fingerprint());
}
