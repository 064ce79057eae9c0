#include "lunarmap/transfer.hpp"

#include <cmath>
#include <stdexcept>

namespace lunarmap {

double normalize_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

OrbitSpec OrbitSpec::make(const SystemConstants& constants, double departure_altitude_km,
                          double arrival_altitude_km) {
  if (!(departure_altitude_km > 0.0) || !(arrival_altitude_km > 0.0)) {
    throw std::invalid_argument("orbit altitudes must be positive");
  }
  OrbitSpec o;
  o.departure_altitude_km = departure_altitude_km;
  o.arrival_altitude_km = arrival_altitude_km;
  o.r_i = constants.canonical_length(constants.earth_radius_km() + departure_altitude_km);
  o.r_f = constants.canonical_length(constants.moon_radius_km() + arrival_altitude_km);
  o.mu = constants.mu();
  o.velocity_unit_km_s = constants.velocity_unit_km_s();
  return o;
}

double OrbitSpec::earth_circular_speed() const { return std::sqrt((1.0 - mu) / r_i); }

double OrbitSpec::moon_circular_speed() const { return std::sqrt(mu / r_f); }

PlanarState departure_state(const ConstructionParams& p, const OrbitSpec& orbit) {
  const double c = std::cos(p.alpha);
  const double s = std::sin(p.alpha);
  const double w = p.beta * orbit.earth_circular_speed() - orbit.r_i;
  return {orbit.r_i * c - orbit.mu, orbit.r_i * s, -w * s, w * c};
}

Vector4 departure_state_beta_derivative(const ConstructionParams& p, const OrbitSpec& orbit) {
  const double vc = orbit.earth_circular_speed();
  return {0.0, 0.0, -vc * std::sin(p.alpha), vc * std::cos(p.alpha)};
}

PlanarState arrival_circular_state(double phase, const OrbitSpec& orbit, double speed_ratio) {
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  const double w = speed_ratio * orbit.moon_circular_speed() - orbit.r_f;
  return {orbit.r_f * c + 1.0 - orbit.mu, orbit.r_f * s, -w * s, w * c};
}

Eigen::Vector2d psi_i(const PlanarState& s, const OrbitSpec& orbit) {
  const double dx = s.x + orbit.mu;
  return {dx * dx + s.y * s.y - orbit.r_i * orbit.r_i, dx * (s.u - s.y) + s.y * (s.v + dx)};
}

Eigen::Vector2d psi_f(const PlanarState& s, const OrbitSpec& orbit) {
  const double dx = s.x + orbit.mu - 1.0;
  return {dx * dx + s.y * s.y - orbit.r_f * orbit.r_f, dx * (s.u - s.y) + s.y * (s.v + dx)};
}

Eigen::Matrix<double, 2, 4> psi_f_state_jacobian(const PlanarState& s, const OrbitSpec& orbit) {
  const double dx = s.x + orbit.mu - 1.0;
  Eigen::Matrix<double, 2, 4> j;
  j << 2.0 * dx, 2.0 * s.y, 0.0, 0.0,
       s.u, s.v, dx, s.y;
  return j;
}

ImpulseSummary impulses(const PlanarState& departure, const PlanarState& arrival,
                        const OrbitSpec& orbit) {
  ImpulseSummary out;
  out.dv_i = std::hypot(departure.u - departure.y, departure.v + departure.x + orbit.mu) -
             orbit.earth_circular_speed();
  out.dv_f = std::hypot(arrival.u - arrival.y, arrival.v + arrival.x + orbit.mu - 1.0) -
             orbit.moon_circular_speed();
  out.dv = out.dv_i + out.dv_f;
  out.dv_i_km_s = out.dv_i * orbit.velocity_unit_km_s;
  out.dv_f_km_s = out.dv_f * orbit.velocity_unit_km_s;
  out.dv_km_s = out.dv_i_km_s + out.dv_f_km_s;
  return out;
}

double moon_angular_momentum(const PlanarState& s, const OrbitSpec& orbit) {
  const double dx = s.x + orbit.mu - 1.0;
  return dx * (s.v + dx) - s.y * (s.u - s.y);
}

}  // namespace lunarmap

namespace lunarmap {

TransferProblem::TransferProblem(const SystemConstants& constants, double departure_altitude_km,
                                 double arrival_altitude_km)
    : constants_(constants),
      orbit_(OrbitSpec::make(constants, departure_altitude_km, arrival_altitude_km)),
      model_(constants) {}

PropagationOptions TransferProblem::arc_options() const {
  PropagationOptions o;
  o.collision_events = true;
  o.earth_arm_radius = 1.05 * orbit_.r_i;
  return o;
}

}  // namespace lunarmap
