#include "lunarmap/corrector.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace lunarmap {

std::string_view to_string(CorrectionStatus s) {
  switch (s) {
    case CorrectionStatus::converged:
      return "converged";
    case CorrectionStatus::stalled:
      return "stalled";
    case CorrectionStatus::bound_locked:
      return "bound_locked";
    case CorrectionStatus::collided_during_iteration:
      return "collided_during_iteration";
    case CorrectionStatus::budget_exhausted:
      return "budget_exhausted";
  }
  return "unknown";
}

void CorrectionSettings::validate() const {
  if (!(beta_lower <= beta_upper) || !(tof_lower <= tof_upper) || !(tof_lower > 0.0)) {
    throw std::invalid_argument("correction bounds must satisfy lower <= upper and tof > 0");
  }
  if (!(step_tolerance > 0.0) || !(function_tolerance > 0.0) ||
      !(constraint_tolerance > 0.0) || !(acceptance > 0.0)) {
    throw std::invalid_argument("correction tolerances must be positive");
  }
  if (max_iterations <= 0 || max_evaluations <= 0 || max_consecutive_collisions <= 0) {
    throw std::invalid_argument("correction budgets must be positive");
  }
  if (!(initial_damping > 0.0) || !(damping_increase > 1.0) || !(damping_decrease > 0.0) ||
      !(damping_decrease < 1.0)) {
    throw std::invalid_argument("damping schedule must shrink below 1 and grow above 1");
  }
}

ResidualEvaluation residual(const TransferProblem& problem, const ConstructionParams& p) {
  ResidualEvaluation out;
  const OrbitSpec& orbit = problem.orbit();
  const PlanarState s0 = departure_state(p, orbit);
  const AugmentedPropagationResult r =
      problem.model().propagate_with_stm(s0, p.tof, problem.arc_options());
  switch (r.terminated_by) {
    case Termination::completed:
      break;
    case Termination::earth_collision:
    case Termination::moon_collision:
      out.status = ResidualStatus::collision;
      return out;
    case Termination::integrator_failure:
      out.status = ResidualStatus::failure;
      return out;
  }

  const PlanarState& end = r.final.state;
  const Eigen::Matrix<double, 2, 4> dpsi = psi_f_state_jacobian(end, orbit);
  out.status = ResidualStatus::ok;
  out.arrival = end;
  out.psi = psi_f(end, orbit);
  out.jacobian.col(0) = dpsi * (r.final.stm * departure_state_beta_derivative(p, orbit));
  out.jacobian.col(1) = dpsi * problem.model().vector_field(end);
  return out;
}

namespace {

using Vector2 = Eigen::Vector2d;

struct Box {
  Vector2 lower;
  Vector2 upper;

  Vector2 clamp(const Vector2& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  bool at_lower(const Vector2& x, int i) const { return x[i] <= lower[i]; }
  bool at_upper(const Vector2& x, int i) const { return x[i] >= upper[i]; }
};

// Marquardt-scaled damped Gauss–Newton step, with variables pinned at a
// bound (and pushed outward by the step) removed from the system.
Vector2 damped_step(const Eigen::Matrix2d& jac, const Vector2& r, double lambda, const Vector2& x,
                    const Box& box) {
  const Eigen::Matrix2d a = jac.transpose() * jac;
  const Vector2 g = jac.transpose() * r;
  std::array<bool, 2> free{true, true};

  Vector2 step = Vector2::Zero();
  for (int pass = 0; pass < 3; ++pass) {
    step.setZero();
    if (free[0] && free[1]) {
      Eigen::Matrix2d m = a;
      for (int i = 0; i < 2; ++i) m(i, i) += lambda * std::max(a(i, i), 1e-300);
      step = m.ldlt().solve(-g);
      if (!step.allFinite()) step = m.fullPivLu().solve(-g);
    } else {
      for (int i = 0; i < 2; ++i) {
        if (!free[i]) continue;
        const double d = a(i, i) + lambda * std::max(a(i, i), 1e-300);
        step[i] = d > 0.0 ? -g[i] / d : 0.0;
      }
    }
    bool changed = false;
    for (int i = 0; i < 2; ++i) {
      if (!free[i]) continue;
      if ((box.at_lower(x, i) && step[i] < 0.0) || (box.at_upper(x, i) && step[i] > 0.0)) {
        free[i] = false;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (int i = 0; i < 2; ++i) {
    if (!free[i]) step[i] = 0.0;
  }
  return step;
}

// Some variable sits on its bound while the descent direction points out.
bool pinned_by_bound(const Eigen::Matrix2d& jac, const Vector2& r, const Vector2& x,
                     const Box& box) {
  const Vector2 g = jac.transpose() * r;
  for (int i = 0; i < 2; ++i) {
    if ((box.at_lower(x, i) && g[i] > 0.0) || (box.at_upper(x, i) && g[i] < 0.0)) return true;
  }
  return false;
}

double condition_number(const Eigen::Matrix2d& jac) {
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(jac);
  const Vector2 sv = svd.singularValues();
  return sv[1] > 0.0 ? sv[0] / sv[1] : std::numeric_limits<double>::infinity();
}

}  // namespace

CorrectionOutcome correct(const TransferProblem& problem, const ConstructionParams& guess,
                          const CorrectionSettings& settings) {
  const Box box{{settings.beta_lower, settings.tof_lower}, {settings.beta_upper, settings.tof_upper}};
  const double target = std::min(settings.constraint_tolerance, settings.acceptance);
  const double alpha = guess.alpha;

  CorrectionOutcome out;
  Vector2 x = box.clamp(Vector2{guess.beta, guess.tof});
  out.params = {alpha, x[0], x[1]};
  out.departure = departure_state(out.params, problem.orbit());

  ResidualEvaluation current = residual(problem, out.params);
  out.evaluations = 1;
  if (current.status != ResidualStatus::ok) {
    out.status = CorrectionStatus::collided_during_iteration;
    out.residual_norm = std::numeric_limits<double>::infinity();
    return out;
  }

  double norm = current.psi.norm();
  out.history.push_back(norm);
  double lambda = settings.initial_damping;
  int consecutive_collisions = 0;
  bool refining = false;

  auto finish = [&](CorrectionStatus status) {
    out.params = {alpha, x[0], x[1]};
    out.departure = departure_state(out.params, problem.orbit());
    out.arrival = current.arrival;
    out.residual_norm = norm;
    out.jacobian_condition = condition_number(current.jacobian);
    out.status = norm < settings.acceptance ? CorrectionStatus::converged : status;
    return out;
  };

  if (norm < target) return finish(CorrectionStatus::converged);

  for (;;) {
    if (out.iterations >= settings.max_iterations || out.evaluations >= settings.max_evaluations) {
      return finish(CorrectionStatus::budget_exhausted);
    }

    const Vector2 step = damped_step(current.jacobian, current.psi, lambda, x, box);
    const Vector2 trial_x = box.clamp(x + step);
    const double x_scale = settings.step_tolerance * (1.0 + x.norm());
    if (trial_x == x || !trial_x.allFinite() || lambda > 1e30) {
      // No usable step remains: either the box blocks descent or the
      // damping has grown until the step vanished.
      return finish(pinned_by_bound(current.jacobian, current.psi, x, box)
                        ? CorrectionStatus::bound_locked
                        : CorrectionStatus::stalled);
    }

    ResidualEvaluation trial = residual(problem, {alpha, trial_x[0], trial_x[1]});
    ++out.evaluations;

    if (trial.status != ResidualStatus::ok) {
      if (refining) return finish(CorrectionStatus::converged);
      lambda *= settings.damping_increase;
      if (++consecutive_collisions >= settings.max_consecutive_collisions) {
        return finish(CorrectionStatus::collided_during_iteration);
      }
      continue;
    }
    consecutive_collisions = 0;

    const double trial_norm = trial.psi.norm();
    if (!(trial_norm < norm)) {
      if (refining) return finish(CorrectionStatus::converged);
      lambda *= settings.damping_increase;
      if ((trial_x - x).norm() <= x_scale) {
        return finish(pinned_by_bound(current.jacobian, current.psi, x, box)
                          ? CorrectionStatus::bound_locked
                          : CorrectionStatus::stalled);
      }
      continue;
    }

    const double decrease = norm - trial_norm;
    const double moved = (trial_x - x).norm();
    x = trial_x;
    current = trial;
    norm = trial_norm;
    lambda = std::max(lambda * settings.damping_decrease, 1e-15);
    ++out.iterations;
    out.history.push_back(norm);

    if (norm < target) {
      // Below the threshold the residual no longer pins the parameters to
      // better than ~1e-7 in tof; keep stepping until the step is negligible.
      if (refining && moved <= x_scale) return finish(CorrectionStatus::converged);
      refining = true;
      continue;
    }
    if (moved <= x_scale && decrease <= settings.function_tolerance * (1.0 + norm)) {
      return finish(pinned_by_bound(current.jacobian, current.psi, x, box)
                        ? CorrectionStatus::bound_locked
                        : CorrectionStatus::stalled);
    }
  }
}

}  // namespace lunarmap
