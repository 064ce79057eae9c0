#include "lunarmap/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "lunarmap/integrator.hpp"

namespace lunarmap {

bool PlanarState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(u) && std::isfinite(v);
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::completed:
      return "completed";
    case Termination::earth_collision:
      return "earth_collision";
    case Termination::moon_collision:
      return "moon_collision";
    case Termination::integrator_failure:
      return "integrator_failure";
  }
  return "unknown";
}

Cr3bp::Cr3bp(const SystemConstants& constants)
    : Cr3bp(constants.mu(), constants.earth_radius(), constants.moon_radius()) {}

Cr3bp::Cr3bp(double mu, double earth_radius, double moon_radius)
    : mu_(mu), earth_radius_(earth_radius), moon_radius_(moon_radius) {
  if (!(mu > 0.0 && mu < 0.5)) throw std::invalid_argument("mu must lie in (0, 0.5)");
  if (!(earth_radius >= 0.0 && moon_radius >= 0.0)) {
    throw std::invalid_argument("primary radii must be non-negative");
  }
}

double Cr3bp::earth_distance(const PlanarState& s) const { return std::hypot(s.x + mu_, s.y); }

double Cr3bp::moon_distance(const PlanarState& s) const {
  return std::hypot(s.x + mu_ - 1.0, s.y);
}

double Cr3bp::potential(double x, double y) const {
  const double r1 = std::hypot(x + mu_, y);
  const double r2 = std::hypot(x + mu_ - 1.0, y);
  return 0.5 * (x * x + y * y) + (1.0 - mu_) / r1 + mu_ / r2;
}

Eigen::Vector2d Cr3bp::potential_gradient(double x, double y) const {
  const double dx1 = x + mu_;
  const double dx2 = x + mu_ - 1.0;
  const double r1sq = dx1 * dx1 + y * y;
  const double r2sq = dx2 * dx2 + y * y;
  const double g1 = (1.0 - mu_) / (r1sq * std::sqrt(r1sq));
  const double g2 = mu_ / (r2sq * std::sqrt(r2sq));
  return {x - g1 * dx1 - g2 * dx2, y - (g1 + g2) * y};
}

Eigen::Vector3d Cr3bp::potential_hessian(double x, double y) const {
  const double dx1 = x + mu_;
  const double dx2 = x + mu_ - 1.0;
  const double r1sq = dx1 * dx1 + y * y;
  const double r2sq = dx2 * dx2 + y * y;
  const double r1_3 = r1sq * std::sqrt(r1sq);
  const double r2_3 = r2sq * std::sqrt(r2sq);
  const double a1 = (1.0 - mu_) / r1_3;
  const double a2 = mu_ / r2_3;
  const double b1 = 3.0 * a1 / r1sq;
  const double b2 = 3.0 * a2 / r2sq;
  const double xx = 1.0 - a1 - a2 + b1 * dx1 * dx1 + b2 * dx2 * dx2;
  const double yy = 1.0 - a1 - a2 + (b1 + b2) * y * y;
  const double xy = (b1 * dx1 + b2 * dx2) * y;
  return {xx, xy, yy};
}

void Cr3bp::vector_field(const Vector4& s, Vector4& out) const {
  const double dx1 = s[0] + mu_;
  const double dx2 = s[0] + mu_ - 1.0;
  const double ysq = s[1] * s[1];
  const double r1sq = dx1 * dx1 + ysq;
  const double r2sq = dx2 * dx2 + ysq;
  const double g1 = (1.0 - mu_) / (r1sq * std::sqrt(r1sq));
  const double g2 = mu_ / (r2sq * std::sqrt(r2sq));
  out[0] = s[2];
  out[1] = s[3];
  out[2] = 2.0 * s[3] + s[0] - g1 * dx1 - g2 * dx2;
  out[3] = -2.0 * s[2] + s[1] - (g1 + g2) * s[1];
}

Vector4 Cr3bp::vector_field(const PlanarState& s) const {
  if (earth_distance(s) == 0.0 || moon_distance(s) == 0.0) {
    throw std::domain_error("vector field is singular at a primary's center");
  }
  Vector4 out;
  vector_field(s.vector(), out);
  return out;
}

Matrix4 Cr3bp::jacobian(const PlanarState& s) const {
  const Eigen::Vector3d h = potential_hessian(s.x, s.y);
  Matrix4 a = Matrix4::Zero();
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  a(2, 0) = h[0];
  a(2, 1) = h[1];
  a(3, 0) = h[1];
  a(3, 1) = h[2];
  a(2, 3) = 2.0;
  a(3, 2) = -2.0;
  return a;
}

AugmentedState Cr3bp::variational_field(const AugmentedState& a) const {
  AugmentedState d;
  d.state = PlanarState::from(vector_field(a.state));
  d.stm = jacobian(a.state) * a.stm;
  return d;
}

double Cr3bp::jacobi_energy(const PlanarState& s) const {
  if (earth_distance(s) == 0.0 || moon_distance(s) == 0.0) {
    throw std::domain_error("Jacobi energy is singular at a primary's center");
  }
  return 2.0 * potential(s.x, s.y) - (s.u * s.u + s.v * s.v);
}

namespace {

using Vector20 = Eigen::Matrix<double, 20, 1>;

struct StateRhs {
  const Cr3bp* model;
  void operator()(double, const Vector4& y, Vector4& dy) const { model->vector_field(y, dy); }
};

struct AugmentedRhs {
  const Cr3bp* model;
  void operator()(double, const Vector20& y, Vector20& dy) const {
    Vector4 ds;
    model->vector_field(Vector4(y.head<4>()), ds);
    dy.head<4>() = ds;
    const Eigen::Vector3d h = model->potential_hessian(y[0], y[1]);
    // Columns of the STM are stored contiguously (column-major 4x4).
    for (int c = 0; c < 4; ++c) {
      const int o = 4 + 4 * c;
      dy[o + 0] = y[o + 2];
      dy[o + 1] = y[o + 3];
      dy[o + 2] = h[0] * y[o + 0] + h[1] * y[o + 1] + 2.0 * y[o + 3];
      dy[o + 3] = h[1] * y[o + 0] + h[2] * y[o + 1] - 2.0 * y[o + 2];
    }
  }
};

struct Body {
  double cx;
  double radius;
  Termination kind;
};

template <class Vec>
double distance_to(const Vec& y, double cx) {
  return std::hypot(y[0] - cx, y[1]);
}

template <class Vec>
double radial_rate(const Vec& y, double cx) {
  return (y[0] - cx) * y[2] + y[1] * y[3];
}

template <class Vec>
bool finite_state(const Vec& y) {
  return std::isfinite(y[0]) && std::isfinite(y[1]) && std::isfinite(y[2]) &&
         std::isfinite(y[3]);
}

// Locates the first time within the last accepted step at which the
// trajectory is inside `body`, or returns false. Between step ends the
// dense-output polynomial is searched, so a pass that dips below the
// surface and exits within one step is still caught.
template <class Stepper>
bool find_surface_crossing(Stepper& stepper, const Body& body, double& t_event) {
  constexpr double kTimeTol = 1e-13;
  const auto& y0 = stepper.y_prev();
  const auto& y1 = stepper.y();
  const double t0 = stepper.t_prev();
  const double t1 = stepper.t();
  const double dir = stepper.direction();

  auto g = [&](double t) { return distance_to(stepper.interpolate(t), body.cx) - body.radius; };

  double t_inside = 0.0;
  if (distance_to(y1, body.cx) <= body.radius) {
    t_inside = t1;
  } else {
    const double d0 = distance_to(y0, body.cx);
    const double d1 = distance_to(y1, body.cx);
    const double rate0 = dir * radial_rate(y0, body.cx);
    const double rate1 = dir * radial_rate(y1, body.cx);
    if (!(rate0 < 0.0 && rate1 > 0.0)) return false;
    const double speed = std::max(std::hypot(y0[2], y0[3]), std::hypot(y1[2], y1[3]));
    if (std::min(d0, d1) - body.radius > 2.0 * std::abs(t1 - t0) * speed) return false;

    // Closest approach: root of the radial rate.
    double lo = t0;
    double hi = t1;
    for (int i = 0; i < 200 && std::abs(hi - lo) > kTimeTol; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (dir * radial_rate(stepper.interpolate(mid), body.cx) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double t_min = 0.5 * (lo + hi);
    if (g(t_min) > 0.0) return false;
    t_inside = t_min;
  }

  double lo = t0;
  double hi = t_inside;
  for (int i = 0; i < 200 && std::abs(hi - lo) > kTimeTol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  t_event = hi;
  return true;
}

template <int N, class Rhs, class OnStep>
Termination drive(const Cr3bp& model, const Eigen::Matrix<double, N, 1>& y0, double tof,
                  const PropagationOptions& options, Rhs rhs, OnStep&& on_step,
                  Eigen::Matrix<double, N, 1>& y_final, double& t_final, std::size_t& steps) {
  IntegratorOptions io;
  io.rtol = options.rtol;
  io.atol = options.atol;
  io.max_steps = options.max_steps;
  io.error_components = 4;
  Dop853<N, Rhs> stepper(rhs, io);

  const Body bodies[2] = {
      {-model.mu(), model.earth_radius(), Termination::earth_collision},
      {1.0 - model.mu(), model.moon_radius(), Termination::moon_collision},
  };
  bool armed[2] = {options.earth_arm_radius <= 0.0 ||
                       distance_to(y0, bodies[0].cx) >= options.earth_arm_radius,
                   true};

  y_final = y0;
  t_final = 0.0;
  steps = 0;
  if (!finite_state(y0)) return Termination::integrator_failure;
  if (options.collision_events) {
    for (int b = 0; b < 2; ++b) {
      if (armed[b] && distance_to(y0, bodies[b].cx) <= bodies[b].radius) {
        return bodies[b].kind;
      }
    }
  }
  if (tof == 0.0) return Termination::completed;

  stepper.start(0.0, y0, tof);
  while (!stepper.finished()) {
    if (stepper.step() != StepStatus::accepted || !finite_state(stepper.y())) {
      y_final = stepper.y();
      t_final = stepper.t();
      steps = stepper.steps();
      return Termination::integrator_failure;
    }
    if (options.collision_events) {
      double t_hit = 0.0;
      int hit = -1;
      for (int b = 0; b < 2; ++b) {
        double t_event = 0.0;
        if (armed[b] && find_surface_crossing(stepper, bodies[b], t_event)) {
          if (hit < 0 || (t_event - t_hit) * stepper.direction() < 0.0) {
            hit = b;
            t_hit = t_event;
          }
        }
      }
      if (hit >= 0) {
        on_step(stepper, t_hit);
        y_final = stepper.interpolate(t_hit);
        t_final = t_hit;
        steps = stepper.steps();
        return bodies[hit].kind;
      }
      if (!armed[0] && distance_to(stepper.y(), bodies[0].cx) >= options.earth_arm_radius) {
        armed[0] = true;
      }
    }
    on_step(stepper, stepper.t());
  }
  y_final = stepper.y();
  t_final = stepper.t();
  steps = stepper.steps();
  return Termination::completed;
}

}  // namespace

PropagationResult Cr3bp::propagate(const PlanarState& s0, double tof,
                                   const PropagationOptions& options) const {
  PropagationResult result;
  std::size_t next_sample = 0;
  const auto& times = options.sample_times;
  const double dir = tof >= 0.0 ? 1.0 : -1.0;

  if (options.record_steps) result.samples.push_back({0.0, s0});
  while (next_sample < times.size() && times[next_sample] * dir <= 0.0) {
    result.samples.push_back({times[next_sample], s0});
    ++next_sample;
  }

  // Emits every requested sample up to `t_limit` within the accepted step.
  auto on_step = [&](auto& stepper, double t_limit) {
    while (next_sample < times.size() && (times[next_sample] - t_limit) * dir <= 0.0) {
      const double ts = times[next_sample];
      const Vector4 y = ts == stepper.t() ? Vector4(stepper.y()) : Vector4(stepper.interpolate(ts));
      result.samples.push_back({ts, PlanarState::from(y)});
      ++next_sample;
    }
    if (options.record_steps) {
      const Vector4 y =
          t_limit == stepper.t() ? Vector4(stepper.y()) : Vector4(stepper.interpolate(t_limit));
      result.samples.push_back({t_limit, PlanarState::from(y)});
    }
  };

  Vector4 y_final;
  result.terminated_by = drive<4>(*this, s0.vector(), tof, options, StateRhs{this}, on_step,
                                  y_final, result.time, result.steps);
  result.final = PlanarState::from(y_final);
  return result;
}

AugmentedPropagationResult Cr3bp::propagate_with_stm(const PlanarState& s0, double tof,
                                                     const PropagationOptions& options) const {
  Vector20 y0;
  y0.head<4>() = s0.vector();
  Eigen::Map<Matrix4>(y0.data() + 4) = Matrix4::Identity();

  Vector20 y_final;
  AugmentedPropagationResult result;
  result.terminated_by = drive<20>(*this, y0, tof, options, AugmentedRhs{this},
                                   [](auto&, double) {}, y_final, result.time, result.steps);
  result.final.state = PlanarState::from(y_final.head<4>());
  result.final.stm = Eigen::Map<const Matrix4>(y_final.data() + 4);
  return result;
}

}  // namespace lunarmap
