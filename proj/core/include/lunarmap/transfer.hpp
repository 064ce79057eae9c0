#pragma once

#include <Eigen/Core>

#include "lunarmap/constants.hpp"
#include "lunarmap/dynamics.hpp"

namespace lunarmap {

/// Departure phase angle (rad), initial-to-circular velocity ratio, and time
/// of flight (TU). Together they fix an initial-guess trajectory.
struct ConstructionParams {
  double alpha = 0.0;
  double beta = 1.0;
  double tof = 0.0;

  friend bool operator==(const ConstructionParams&, const ConstructionParams&) = default;
};

/// Wraps an angle into [0, 2π).
double normalize_angle(double angle);

/// Circular Earth parking orbit and circular Moon target orbit.
struct OrbitSpec {
  double departure_altitude_km = 167.0;
  double arrival_altitude_km = 100.0;
  /// Canonical radii (R_E + h_i)/LU and (R_M + h_f)/LU.
  double r_i = 0.0;
  double r_f = 0.0;
  double mu = 0.0;
  double velocity_unit_km_s = 0.0;

  /// Throws std::invalid_argument for non-positive altitudes.
  static OrbitSpec make(const SystemConstants& constants, double departure_altitude_km = 167.0,
                        double arrival_altitude_km = 100.0);

  /// Local circular speeds (VU) about Earth at r_i and about the Moon at r_f.
  double earth_circular_speed() const;
  double moon_circular_speed() const;
};

struct ImpulseSummary {
  // canonical
  double dv_i = 0.0;
  double dv_f = 0.0;
  double dv = 0.0;
  // km/s
  double dv_i_km_s = 0.0;
  double dv_f_km_s = 0.0;
  double dv_km_s = 0.0;
};

/// State on the prograde parking orbit at phase angle alpha with inertial
/// speed beta times circular, directed along the local horizontal.
PlanarState departure_state(const ConstructionParams& p, const OrbitSpec& orbit);

/// d(departure_state)/d(beta): zero position rows.
Vector4 departure_state_beta_derivative(const ConstructionParams& p, const OrbitSpec& orbit);

/// Moon-centered analog of departure_state (prograde circular at r_f).
PlanarState arrival_circular_state(double phase, const OrbitSpec& orbit, double speed_ratio = 1.0);

/// Earth-side radius and tangency residual.
Eigen::Vector2d psi_i(const PlanarState& s, const OrbitSpec& orbit);

/// Moon-side radius and tangency residual.
Eigen::Vector2d psi_f(const PlanarState& s, const OrbitSpec& orbit);

/// d(psi_f)/d(state), 2x4.
Eigen::Matrix<double, 2, 4> psi_f_state_jacobian(const PlanarState& s, const OrbitSpec& orbit);

/// Signed tangential impulses at both ends; dv = dv_i + dv_f.
ImpulseSummary impulses(const PlanarState& departure, const PlanarState& arrival,
                        const OrbitSpec& orbit);

/// Moon-centered inertial angular momentum at insertion; its sign is the
/// insertion sense (+1 prograde, -1 retrograde).
double moon_angular_momentum(const PlanarState& s, const OrbitSpec& orbit);

/// Constants, orbit pair and dynamical model bundled for the search and
/// correction stages.
class TransferProblem {
 public:
  TransferProblem(const SystemConstants& constants, double departure_altitude_km,
                  double arrival_altitude_km);

  const SystemConstants& constants() const { return constants_; }
  const OrbitSpec& orbit() const { return orbit_; }
  const Cr3bp& model() const { return model_; }

  /// Propagation settings for transfer arcs: collision events armed, with
  /// the Earth event held until the arc has cleared the parking orbit.
  PropagationOptions arc_options() const;

 private:
  SystemConstants constants_;
  OrbitSpec orbit_;
  Cr3bp model_;
};

}  // namespace lunarmap
