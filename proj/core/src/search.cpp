#include "lunarmap/search.hpp"

namespace lunarmap {

std::string_view to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::feasible_guess:
      return "feasible_guess";
    case CandidateStatus::collided:
      return "collided";
    case CandidateStatus::integrator_failure:
      return "integrator_failure";
  }
  return "unknown";
}

namespace {

CandidateStatus status_of(Termination t) {
  switch (t) {
    case Termination::completed:
      return CandidateStatus::feasible_guess;
    case Termination::earth_collision:
    case Termination::moon_collision:
      return CandidateStatus::collided;
    case Termination::integrator_failure:
      break;
  }
  return CandidateStatus::integrator_failure;
}

Candidate feasible(const ConstructionParams& p, const PlanarState& end, const OrbitSpec& orbit) {
  Candidate c;
  c.params = p;
  c.status = CandidateStatus::feasible_guess;
  c.final_state = end;
  c.psi_f_norm = psi_f(end, orbit).norm();
  return c;
}

}  // namespace

Candidate evaluate_candidate(const TransferProblem& problem, const ConstructionParams& p) {
  const PlanarState s0 = departure_state(p, problem.orbit());
  const PropagationResult r = problem.model().propagate(s0, p.tof, problem.arc_options());
  if (r.terminated_by == Termination::completed) return feasible(p, r.final, problem.orbit());
  Candidate c;
  c.params = p;
  c.status = status_of(r.terminated_by);
  return c;
}

std::vector<Candidate> evaluate_ray(const TransferProblem& problem, double alpha, double beta,
                                    std::span<const double> tofs) {
  std::vector<Candidate> out;
  out.reserve(tofs.size());
  if (tofs.empty()) return out;

  PropagationOptions options = problem.arc_options();
  options.sample_times.assign(tofs.begin(), tofs.end());
  const PlanarState s0 = departure_state({alpha, beta, tofs.back()}, problem.orbit());
  const PropagationResult r = problem.model().propagate(s0, tofs.back(), options);

  for (std::size_t k = 0; k < tofs.size(); ++k) {
    const ConstructionParams p{alpha, beta, tofs[k]};
    if (k < r.samples.size() &&
        (r.terminated_by == Termination::completed || r.samples[k].t < r.time)) {
      out.push_back(feasible(p, r.samples[k].state, problem.orbit()));
    } else {
      Candidate c;
      c.params = p;
      c.status = status_of(r.terminated_by);
      out.push_back(c);
    }
  }
  return out;
}

bool screen(const Candidate& c, std::optional<double> threshold) {
  if (c.status != CandidateStatus::feasible_guess || !c.psi_f_norm) return false;
  return !threshold || *c.psi_f_norm < *threshold;
}

}  // namespace lunarmap
