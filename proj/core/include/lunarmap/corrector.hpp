#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string_view>
#include <vector>

#include "lunarmap/search.hpp"
#include "lunarmap/transfer.hpp"

namespace lunarmap {

/// Bounds, tolerances and budgets for the (beta, tof) correction with alpha
/// held fixed. Defaults are the standard settings for the transfer survey.
struct CorrectionSettings {
  double beta_lower = 1.4;
  double beta_upper = 1.414;
  double tof_lower = kPi / 50.0;
  double tof_upper = 10.0 * kPi;
  double step_tolerance = 1e-8;
  double function_tolerance = 1e-8;
  double constraint_tolerance = 1e-8;
  int max_iterations = 500;
  int max_evaluations = 500;
  /// A record is accepted iff ||psi_f|| is strictly below this.
  double acceptance = 1e-8;

  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 0.1;
  int max_consecutive_collisions = 20;

  /// Throws std::invalid_argument on non-positive tolerances, empty boxes or
  /// non-positive budgets.
  void validate() const;
};

enum class CorrectionStatus {
  converged,
  stalled,
  bound_locked,
  collided_during_iteration,
  budget_exhausted,
};

std::string_view to_string(CorrectionStatus s);

struct CorrectionOutcome {
  CorrectionStatus status = CorrectionStatus::stalled;
  ConstructionParams params;
  double residual_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double jacobian_condition = 0.0;
  PlanarState departure;
  PlanarState arrival;
  /// Residual norm after each accepted iterate, starting with the guess.
  std::vector<double> history;
};

enum class ResidualStatus { ok, collision, failure };

struct ResidualEvaluation {
  ResidualStatus status = ResidualStatus::failure;
  Eigen::Vector2d psi = Eigen::Vector2d::Zero();
  /// Columns: d(psi_f)/d(beta), d(psi_f)/d(tof).
  Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
  PlanarState arrival;
};

/// psi_f at the end of the arc and its analytic Jacobian over (beta, tof),
/// from one propagation of the state and its STM.
ResidualEvaluation residual(const TransferProblem& problem, const ConstructionParams& p);

/// Damped Gauss–Newton (Levenberg–Marquardt) on psi_f over the (beta, tof)
/// box. Alpha is never modified. Failures are reported through the status.
CorrectionOutcome correct(const TransferProblem& problem, const ConstructionParams& guess,
                          const CorrectionSettings& settings);

inline CorrectionOutcome correct(const TransferProblem& problem, const Candidate& guess,
                                 const CorrectionSettings& settings) {
  return correct(problem, guess.params, settings);
}

}  // namespace lunarmap
