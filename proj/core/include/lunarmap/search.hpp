#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lunarmap/transfer.hpp"

namespace lunarmap {

enum class CandidateStatus { feasible_guess, collided, integrator_failure };

std::string_view to_string(CandidateStatus s);

/// An initial guess: construction parameters and where the uncorrected arc
/// ends. `psi_f_norm` is set iff the arc completed without collision.
struct Candidate {
  ConstructionParams params;
  CandidateStatus status = CandidateStatus::integrator_failure;
  std::optional<PlanarState> final_state;
  std::optional<double> psi_f_norm;
};

/// Propagates the departure state for p.tof with collision events armed.
Candidate evaluate_candidate(const TransferProblem& problem, const ConstructionParams& p);

/// Evaluates every tof in `tofs` (ascending) for one (alpha, beta) pair from
/// a single propagation sampled with dense output. Entries after a collision
/// are marked collided.
std::vector<Candidate> evaluate_ray(const TransferProblem& problem, double alpha, double beta,
                                    std::span<const double> tofs);

/// True iff the guess is feasible and, when a threshold is given, its
/// psi_f norm is below it.
bool screen(const Candidate& c, std::optional<double> threshold);

}  // namespace lunarmap
