#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "lunarmap/corrector.hpp"

using namespace lunarmap;

namespace {

const TransferProblem& problem() {
  static const TransferProblem p(SystemConstants{}, 167.0, 100.0);
  return p;
}

struct Found {
  ConstructionParams guess;
  CorrectionOutcome outcome;
};

// First converged correction along one coarse ray.
const Found& reference() {
  static const Found found = [] {
    std::vector<double> tofs;
    for (int k = 0; k < 250; ++k) tofs.push_back(kPi / 50.0 + k * kPi / 25.0);
    const CorrectionSettings settings;
    for (const Candidate& c : evaluate_ray(problem(), kPi / 4.0, 1.405, tofs)) {
      if (!screen(c, std::nullopt)) continue;
      const CorrectionOutcome o = correct(problem(), c, settings);
      if (o.status == CorrectionStatus::converged && o.params.beta > 1.401 &&
          o.params.beta < 1.413) {
        return Found{c.params, o};
      }
    }
    return Found{};
  }();
  return found;
}

double independent_residual(const ConstructionParams& p) {
  const PropagationResult r =
      problem().model().propagate(departure_state(p, problem().orbit()), p.tof);
  EXPECT_EQ(r.terminated_by, Termination::completed);
  return psi_f(r.final, problem().orbit()).norm();
}

}  // namespace

TEST(Corrector, SettingsValidation) {
  CorrectionSettings s;
  EXPECT_NO_THROW(s.validate());
  s.beta_lower = 1.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.acceptance = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.damping_decrease = 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.max_evaluations = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Corrector, ResidualJacobianMatchesDifferences) {
  // Feasible candidates from two rays, every fifth sample.
  std::vector<double> tofs;
  for (int k = 0; k < 250; k += 5) tofs.push_back(kPi / 50.0 + k * kPi / 25.0);
  std::vector<ConstructionParams> guesses;
  for (auto [alpha, beta] : {std::pair{0.5, 1.406}, {5.0, 1.402}}) {
    for (const Candidate& c : evaluate_ray(problem(), alpha, beta, tofs)) {
      if (c.status == CandidateStatus::feasible_guess) guesses.push_back(c.params);
    }
  }
  ASSERT_GE(guesses.size(), 10u);
  const double h = 1e-8;
  for (const ConstructionParams& p : guesses) {
    const ResidualEvaluation e = residual(problem(), p);
    ASSERT_EQ(e.status, ResidualStatus::ok);
    const auto psi_at = [&](double beta, double tof) {
      return residual(problem(), {p.alpha, beta, tof}).psi;
    };
    const Eigen::Vector2d d_beta = (psi_at(p.beta + h, p.tof) - psi_at(p.beta - h, p.tof)) / (2 * h);
    const Eigen::Vector2d d_tof = (psi_at(p.beta, p.tof + h) - psi_at(p.beta, p.tof - h)) / (2 * h);
    EXPECT_LT((e.jacobian.col(0) - d_beta).norm() / d_beta.norm(), 1e-5) << p.tof;
    EXPECT_LT((e.jacobian.col(1) - d_tof).norm() / d_tof.norm(), 1e-5) << p.tof;
  }
}

TEST(Corrector, ConvergesBelowAcceptance) {
  const Found& f = reference();
  ASSERT_EQ(f.outcome.status, CorrectionStatus::converged);
  const CorrectionOutcome& o = f.outcome;
  EXPECT_LT(o.residual_norm, 1e-8);
  EXPECT_EQ(o.params.alpha, f.guess.alpha);
  EXPECT_GE(o.params.beta, 1.4);
  EXPECT_LE(o.params.beta, 1.414);
  EXPECT_LT(independent_residual(o.params), 1e-8);
  EXPECT_EQ(o.departure, departure_state(o.params, problem().orbit()));
  EXPECT_EQ(o.history.size(), static_cast<std::size_t>(o.iterations) + 1);
  for (std::size_t i = 1; i < o.history.size(); ++i) EXPECT_LT(o.history[i], o.history[i - 1]);
}

TEST(Corrector, SolvedGuessExitsImmediately) {
  const Found& f = reference();
  ASSERT_EQ(f.outcome.status, CorrectionStatus::converged);
  const CorrectionOutcome again = correct(problem(), f.outcome.params, CorrectionSettings{});
  EXPECT_EQ(again.status, CorrectionStatus::converged);
  EXPECT_EQ(again.iterations, 0);
  EXPECT_EQ(again.params, f.outcome.params);
}

TEST(Corrector, RecoversFromPerturbation) {
  // First solution on the ray whose perturbed guess clears both bodies; a
  // guess that starts on a colliding arc is outside any basin.
  std::vector<double> tofs;
  for (int k = 0; k < 250; ++k) tofs.push_back(kPi / 50.0 + k * kPi / 25.0);
  const CorrectionSettings settings;
  int tried = 0;
  for (const Candidate& c : evaluate_ray(problem(), kPi / 4.0, 1.405, tofs)) {
    if (!screen(c, std::nullopt)) continue;
    const CorrectionOutcome sol = correct(problem(), c, settings);
    if (sol.status != CorrectionStatus::converged) continue;
    const ConstructionParams s = sol.params;
    const ConstructionParams guess{s.alpha, s.beta + 5e-5, s.tof + 1e-3};
    if (evaluate_candidate(problem(), guess).status != CandidateStatus::feasible_guess) continue;
    ++tried;
    const CorrectionOutcome o = correct(problem(), guess, settings);
    ASSERT_EQ(o.status, CorrectionStatus::converged) << "tof " << s.tof;
    EXPECT_LT(std::abs(o.params.beta - s.beta), 1e-7);
    EXPECT_LT(std::abs(o.params.tof - s.tof), 1e-7);
    break;
  }
  EXPECT_EQ(tried, 1);
}

TEST(Corrector, PinnedBoxReportsBoundLocked) {
  const Found& f = reference();
  ASSERT_EQ(f.outcome.status, CorrectionStatus::converged);
  const ConstructionParams s = f.outcome.params;
  CorrectionSettings box;
  box.beta_lower = box.beta_upper = s.beta - 1e-4;
  const CorrectionOutcome o = correct(problem(), s, box);
  EXPECT_EQ(o.status, CorrectionStatus::bound_locked);
  EXPECT_EQ(o.params.beta, box.beta_lower);
  EXPECT_GT(o.residual_norm, 1e-8);
}

TEST(Corrector, CollidingGuessIsReported) {
  std::vector<double> tofs;
  for (int k = 0; k < 250; ++k) tofs.push_back(kPi / 50.0 + k * kPi / 25.0);
  std::optional<ConstructionParams> collided;
  for (double alpha = 0.0; alpha < kTwoPi && !collided; alpha += kPi / 6.0) {
    for (const Candidate& c : evaluate_ray(problem(), alpha, 1.41, tofs)) {
      if (c.status == CandidateStatus::collided) {
        collided = c.params;
        break;
      }
    }
  }
  ASSERT_TRUE(collided.has_value());
  const CorrectionOutcome o = correct(problem(), *collided, CorrectionSettings{});
  EXPECT_EQ(o.status, CorrectionStatus::collided_during_iteration);
  EXPECT_EQ(o.iterations, 0);
}

TEST(Corrector, BudgetExhaustion) {
  const Found& f = reference();
  ASSERT_GT(f.outcome.iterations, 1);
  CorrectionSettings tight;
  tight.max_iterations = 1;
  const CorrectionOutcome o = correct(problem(), f.guess, tight);
  EXPECT_EQ(o.status, CorrectionStatus::budget_exhausted);
  EXPECT_EQ(o.iterations, 1);
  EXPECT_LT(o.residual_norm, o.history.front());
}
