#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "lunarmap/constants.hpp"

namespace lunarmap {

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

/// Position (LU) and velocity (LU/TU) in the Earth–Moon rotating frame.
struct PlanarState {
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;

  Vector4 vector() const { return {x, y, u, v}; }
  static PlanarState from(const Vector4& s) { return {s[0], s[1], s[2], s[3]}; }
  /// Reflection across the Earth–Moon line: (x, -y, -u, v).
  PlanarState mirrored() const { return {x, -y, -u, v}; }
  bool finite() const;

  friend bool operator==(const PlanarState&, const PlanarState&) = default;
};

/// State plus its 4x4 sensitivity matrix with respect to the initial state.
struct AugmentedState {
  PlanarState state;
  Matrix4 stm = Matrix4::Identity();
};

enum class Termination { completed, earth_collision, moon_collision, integrator_failure };

std::string_view to_string(Termination t);

struct TimedState {
  double t = 0.0;
  PlanarState state;
};

struct PropagationOptions {
  double rtol = 1e-13;
  double atol = 1e-13;
  bool collision_events = true;
  /// The Earth-surface event stays disarmed until the distance from the
  /// Earth first reaches this radius (LU). Zero arms it from the start.
  double earth_arm_radius = 0.0;
  /// Output times for dense sampling, ordered in the integration direction.
  /// Samples past a collision are not produced.
  std::vector<double> sample_times;
  /// Record every accepted step end as a sample (trajectory export).
  bool record_steps = false;
  std::size_t max_steps = 1'000'000;
};

struct PropagationResult {
  PlanarState final;
  double time = 0.0;
  Termination terminated_by = Termination::completed;
  std::vector<TimedState> samples;
  std::size_t steps = 0;
};

struct AugmentedPropagationResult {
  AugmentedState final;
  double time = 0.0;
  Termination terminated_by = Termination::completed;
  std::size_t steps = 0;
};

/// The planar circular restricted three-body model in the Earth–Moon
/// rotating frame: Earth at (-mu, 0), Moon at (1 - mu, 0).
class Cr3bp {
 public:
  explicit Cr3bp(const SystemConstants& constants);
  Cr3bp(double mu, double earth_radius, double moon_radius);

  double mu() const { return mu_; }
  double earth_radius() const { return earth_radius_; }
  double moon_radius() const { return moon_radius_; }

  double earth_distance(const PlanarState& s) const;
  double moon_distance(const PlanarState& s) const;

  /// Effective potential 0.5 (x^2 + y^2) + (1 - mu)/r1 + mu/r2.
  double potential(double x, double y) const;
  /// (dOmega/dx, dOmega/dy).
  Eigen::Vector2d potential_gradient(double x, double y) const;
  /// Hessian entries (Omega_xx, Omega_xy, Omega_yy).
  Eigen::Vector3d potential_hessian(double x, double y) const;

  /// Time derivative [u, v, 2v + Omega_x, -2u + Omega_y].
  /// Throws std::domain_error at either primary's center.
  Vector4 vector_field(const PlanarState& s) const;
  void vector_field(const Vector4& s, Vector4& out) const;

  /// Jacobian of the vector field.
  Matrix4 jacobian(const PlanarState& s) const;

  /// Derivative of the state and of the STM: d(stm)/dt = A * stm.
  AugmentedState variational_field(const AugmentedState& a) const;

  /// 2 Omega - (u^2 + v^2).
  double jacobi_energy(const PlanarState& s) const;

  /// Integrates for `tof` TU (negative integrates backwards).
  PropagationResult propagate(const PlanarState& s0, double tof,
                              const PropagationOptions& options = {}) const;

  /// Integrates state and STM together; step control uses the state only,
  /// so the state history matches `propagate` exactly.
  AugmentedPropagationResult propagate_with_stm(const PlanarState& s0, double tof,
                                                const PropagationOptions& options = {}) const;

 private:
  double mu_;
  double earth_radius_;
  double moon_radius_;
};

}  // namespace lunarmap
