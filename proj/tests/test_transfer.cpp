#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lunarmap/transfer.hpp"

using namespace lunarmap;

namespace {

const TransferProblem& problem() {
  static const TransferProblem p(SystemConstants{}, 167.0, 100.0);
  return p;
}

const OrbitSpec& orbit() { return problem().orbit(); }

// Earth-relative inertial velocity of a rotating-frame state.
Eigen::Vector2d earth_inertial_velocity(const PlanarState& s, double mu) {
  return {s.u - s.y, s.v + s.x + mu};
}

}  // namespace

TEST(Transfer, OrbitRadii) {
  EXPECT_DOUBLE_EQ(orbit().r_i, (6378.145 + 167.0) / 384400.0);
  EXPECT_DOUBLE_EQ(orbit().r_f, (1737.1 + 100.0) / 384400.0);
  EXPECT_THROW(OrbitSpec::make(SystemConstants{}, 0.0, 100.0), std::invalid_argument);
}

TEST(Transfer, DepartureStateGeometry) {
  const double mu = orbit().mu;
  for (double alpha : {0.0, 0.3, kPi / 2, 2.0, kPi, 5.5}) {
    const double beta = 1.407;
    const PlanarState s = departure_state({alpha, beta, 1.0}, orbit());
    EXPECT_NEAR(std::hypot(s.x + mu, s.y), orbit().r_i, 1e-16);
    const Eigen::Vector2d vin = earth_inertial_velocity(s, mu);
    EXPECT_NEAR(vin.norm(), beta * std::sqrt((1.0 - mu) / orbit().r_i), 1e-13);
    // Horizontal and prograde.
    const Eigen::Vector2d rel{s.x + mu, s.y};
    EXPECT_NEAR(rel.dot(vin), 0.0, 1e-15);
    EXPECT_GT(rel.x() * vin.y() - rel.y() * vin.x(), 0.0);
  }
}

TEST(Transfer, PsiIVanishesOnDeparture) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(0.0, kTwoPi);
  std::uniform_real_distribution<double> b(1.4, 1.414);
  for (int i = 0; i < 200; ++i) {
    EXPECT_LT(psi_i(departure_state({a(rng), b(rng), 1.0}, orbit()), orbit()).norm(), 1e-14);
  }
}

TEST(Transfer, PsiFVanishesOnCircularArrival) {
  for (double phase : {0.0, 1.0, 3.0, 4.5}) {
    EXPECT_LT(psi_f(arrival_circular_state(phase, orbit(), 1.3), orbit()).norm(), 1e-15);
  }
}

TEST(Transfer, PsiFDetectsRadialVelocity) {
  // On the lunar orbit with a purely radial Moon-relative velocity vr.
  const double rf = orbit().r_f;
  const double vr = 0.1;
  const double c = std::cos(0.4);
  const double s = std::sin(0.4);
  const double x = 1.0 - orbit().mu + rf * c;
  const double y = rf * s;
  // Rotating velocity = inertial (Moon-relative) - omega x r_rel.
  const PlanarState st{x, y, vr * c + y, vr * s - (x - 1.0 + orbit().mu)};
  const Eigen::Vector2d psi = psi_f(st, orbit());
  EXPECT_NEAR(psi[0], 0.0, 1e-16);
  EXPECT_NEAR(psi[1], rf * vr, 1e-15);
}

TEST(Transfer, PsiFJacobianMatchesDifferences) {
  const PlanarState s{0.95, 0.03, -0.4, 0.7};
  const auto j = psi_f_state_jacobian(s, orbit());
  const double h = 1e-7;
  for (int k = 0; k < 4; ++k) {
    Vector4 p = s.vector();
    Vector4 m = s.vector();
    p[k] += h;
    m[k] -= h;
    const Eigen::Vector2d col =
        (psi_f(PlanarState::from(p), orbit()) - psi_f(PlanarState::from(m), orbit())) / (2 * h);
    EXPECT_LT((j.col(k) - col).norm(), 1e-8);
  }
}

TEST(Transfer, BetaDerivativeMatchesDifferences) {
  const ConstructionParams p{1.1, 1.41, 2.0};
  const double h = 1e-6;
  const Vector4 fd = (departure_state({p.alpha, p.beta + h, p.tof}, orbit()).vector() -
                      departure_state({p.alpha, p.beta - h, p.tof}, orbit()).vector()) /
                     (2 * h);
  EXPECT_LT((departure_state_beta_derivative(p, orbit()) - fd).norm(), 1e-9);
}

TEST(Transfer, DepartureImpulseIsAffineInBeta) {
  const PlanarState arrival = arrival_circular_state(0.0, orbit());
  const double vc = orbit().earth_circular_speed();
  for (double alpha : {0.0, 1.0, 4.0}) {
    EXPECT_NEAR(impulses(departure_state({alpha, 1.0, 1.0}, orbit()), arrival, orbit()).dv_i, 0.0,
                1e-14);
    for (double beta : {1.0, 1.2, 1.4, 1.414}) {
      const ImpulseSummary imp = impulses(departure_state({alpha, beta, 1.0}, orbit()), arrival, orbit());
      EXPECT_NEAR(imp.dv_i, (beta - 1.0) * vc, 1e-14);
      EXPECT_NEAR(imp.dv_f, 0.0, 1e-14);
    }
  }
}

TEST(Transfer, ImpulseSumIsExact) {
  const PlanarState dep = departure_state({0.5, 1.41, 1.0}, orbit());
  const PlanarState arr = arrival_circular_state(2.0, orbit(), 1.3);
  const ImpulseSummary imp = impulses(dep, arr, orbit());
  EXPECT_EQ(imp.dv, imp.dv_i + imp.dv_f);
  EXPECT_EQ(imp.dv_km_s, imp.dv_i_km_s + imp.dv_f_km_s);
  EXPECT_NEAR(imp.dv_f, 0.3 * orbit().moon_circular_speed(), 1e-14);
  EXPECT_NEAR(imp.dv_km_s, imp.dv * orbit().velocity_unit_km_s, 1e-13);
}

TEST(Transfer, InsertionSense) {
  EXPECT_GT(moon_angular_momentum(arrival_circular_state(1.0, orbit(), 1.2), orbit()), 0.0);
  EXPECT_LT(moon_angular_momentum(arrival_circular_state(1.0, orbit(), -1.2), orbit()), 0.0);
}

TEST(Transfer, NormalizeAngle) {
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi / 2), 1.5 * kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(5.0 * kPi), kPi);
  EXPECT_EQ(normalize_angle(kTwoPi), 0.0);
}

TEST(Transfer, ArcOptionsArmEarthAboveParkingOrbit) {
  const PropagationOptions o = problem().arc_options();
  EXPECT_TRUE(o.collision_events);
  EXPECT_GT(o.earth_arm_radius, orbit().r_i);
}
