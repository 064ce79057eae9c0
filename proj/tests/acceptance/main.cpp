// Acceptance suite: one PASS/FAIL line per criterion. Exit status is zero
// only when every criterion passes.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lunarmap/analysis.hpp"
#include "lunarmap/config.hpp"
#include "lunarmap/corrector.hpp"
#include "lunarmap/grid.hpp"
#include "lunarmap/sweep.hpp"

using namespace lunarmap;
namespace fs = std::filesystem;

namespace {

struct Options {
  fs::path workdir = "acceptance_runs";
  unsigned workers = std::max(2u, std::thread::hardware_concurrency());
  std::set<int> only;
};

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& text) {
  std::printf("       %s\n", text.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const TransferProblem& problem() {
  static const TransferProblem p(SystemConstants{}, 167.0, 100.0);
  return p;
}

GridSpec desk_grid() {
  GridSpec g;
  g.alpha.step = kPi / 12.0;
  g.beta.step = 0.001;
  g.tof.step = kPi / 25.0;
  return g;
}

double max_abs(const Vector4& v) { return v.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------

void dynamics_suite() {
  const auto start = std::chrono::steady_clock::now();
  const Cr3bp& model = problem().model();
  const GridSpec grid;
  const double horizon = 10.0 * kPi;
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);

  // Grid departure states whose arc stays clear of both bodies for 10π TU.
  struct Sample {
    ConstructionParams p;
    PlanarState s0;
  };
  std::vector<Sample> samples;
  int draws = 0;
  while (samples.size() < 100 && draws < 20000) {
    ++draws;
    const ConstructionParams p = grid.at(pick(rng));
    const PlanarState s0 = departure_state(p, problem().orbit());
    if (model.propagate(s0, horizon, problem().arc_options()).terminated_by ==
        Termination::completed) {
      samples.push_back({p, s0});
    }
  }

  PropagationOptions plain;
  plain.collision_events = false;

  double drift = 0.0;
  PropagationOptions dense = plain;
  for (int k = 0; k <= 200; ++k) dense.sample_times.push_back(horizon * k / 200.0);
  for (const Sample& s : samples) {
    const double c0 = model.jacobi_energy(s.s0);
    for (const TimedState& ts : model.propagate(s.s0, horizon, dense).samples) {
      drift = std::max(drift, std::abs(model.jacobi_energy(ts.state) - c0));
    }
  }

  // Reversibility and STM checks use a 1 TU arc: on full transfer arcs the
  // flow's exponential divergence amplifies the 1e-13 local tolerance past
  // any fixed componentwise bound. Mirror symmetry holds on full grid arcs.
  const double arc = 1.0;
  double reverse = 0.0;
  double reverse_full = 0.0;
  double mirror = 0.0;
  for (const Sample& s : samples) {
    const PlanarState fwd = model.propagate(s.s0, arc, plain).final;
    reverse = std::max(reverse, max_abs(model.propagate(fwd, -arc, plain).final.vector() -
                                        s.s0.vector()));
    const PlanarState far = model.propagate(s.s0, s.p.tof, plain).final;
    reverse_full = std::max(reverse_full, max_abs(model.propagate(far, -s.p.tof, plain).final.vector() -
                                                  s.s0.vector()));
    const PlanarState back = model.propagate(s.s0.mirrored(), -s.p.tof, plain).final;
    mirror = std::max(mirror, max_abs(back.vector() - far.mirrored().vector()));
  }

  // STM against central differences of the flow map, step 1e-8.
  double stm_err = 0.0;
  const double h = 1e-8;
  for (const Sample& s : samples) {
    const Matrix4 phi = model.propagate_with_stm(s.s0, arc, plain).final.stm;
    Matrix4 fd;
    for (int j = 0; j < 4; ++j) {
      Vector4 p = s.s0.vector();
      Vector4 m = s.s0.vector();
      p[j] += h;
      m[j] -= h;
      fd.col(j) = (model.propagate(PlanarState::from(p), arc, plain).final.vector() -
                   model.propagate(PlanarState::from(m), arc, plain).final.vector()) /
                  (2 * h);
    }
    stm_err = std::max(stm_err, (phi - fd).norm() / fd.norm());
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = samples.size() == 100 && drift < 1e-10 && reverse < 1e-9 && stm_err < 1e-5 &&
                    mirror < 1e-9;
  std::ostringstream d;
  d << samples.size() << " states; jacobi drift " << fmt("%.2e", drift)
    << " (<1e-10), 1 TU reversal " << fmt("%.2e", reverse) << " (<1e-9), stm vs fd "
    << fmt("%.2e", stm_err) << " (<1e-5), mirror " << fmt("%.2e", mirror) << " (<1e-9); "
    << fmt("%.1f", secs) << " s";
  report(1, "dynamics properties", pass, d.str());
  info("reversal over each state's full grid TOF (not checked): " + fmt("%.2e", reverse_full));
}

// ---------------------------------------------------------------------------

void boundary_suite() {
  const OrbitSpec& orbit = problem().orbit();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> alpha(0.0, kTwoPi);
  std::uniform_real_distribution<double> beta(1.4, 1.414);
  const PlanarState arrival = arrival_circular_state(0.0, orbit);

  double psi_max = 0.0;
  double at_one = 0.0;
  double affine = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = alpha(rng);
    const double b = beta(rng);
    psi_max = std::max(psi_max, psi_i(departure_state({a, b, 1.0}, orbit), orbit).norm());
    const auto dv = [&](double bb) {
      return impulses(departure_state({a, bb, 1.0}, orbit), arrival, orbit).dv_i;
    };
    at_one = std::max(at_one, std::abs(dv(1.0)));
    // Line through beta = 1 and beta = 1.414, evaluated at b.
    const double lo = dv(1.0);
    const double hi = dv(1.414);
    const double line = lo + (b - 1.0) * (hi - lo) / 0.414;
    affine = std::max(affine, std::abs(dv(b) - line));
  }
  const bool pass = psi_max < 1e-14 && at_one < 1e-14 && affine < 1e-14;
  std::ostringstream d;
  d << "1000 (alpha, beta): max |psi_i| " << fmt("%.2e", psi_max) << ", max |dv_i(beta=1)| "
    << fmt("%.2e", at_one) << ", affine deviation " << fmt("%.2e", affine) << " (all <1e-14)";
  report(2, "boundary-model identities", pass, d.str());
}

// ---------------------------------------------------------------------------

void corrector_suite() {
  const auto start = std::chrono::steady_clock::now();
  const GridSpec grid = desk_grid();
  const CorrectionSettings settings;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);

  std::vector<std::size_t> indices;
  while (indices.size() < 50) {
    const std::size_t idx = pick(rng);
    if (std::find(indices.begin(), indices.end(), idx) != indices.end()) continue;
    if (evaluate_candidate(problem(), grid.at(idx)).status == CandidateStatus::feasible_guess) {
      indices.push_back(idx);
    }
  }
  std::sort(indices.begin(), indices.end());

  double jac_err = 0.0;
  double jac_err_extrapolated = 0.0;
  int jac_over = 0;
  int jac_checked = 0;
  const double h = 1e-8;
  for (std::size_t idx : indices) {
    const ConstructionParams p = grid.at(idx);
    const ResidualEvaluation e = residual(problem(), p);
    if (e.status != ResidualStatus::ok) continue;
    const auto psi_at = [&](double b, double t) {
      return residual(problem(), {p.alpha, b, t}).psi;
    };
    const Eigen::Vector2d db = (psi_at(p.beta + h, p.tof) - psi_at(p.beta - h, p.tof)) / (2 * h);
    const Eigen::Vector2d dt = (psi_at(p.beta, p.tof + h) - psi_at(p.beta, p.tof - h)) / (2 * h);
    const double err = std::max((e.jacobian.col(0) - db).norm() / db.norm(),
                                (e.jacobian.col(1) - dt).norm() / dt.norm());
    jac_err = std::max(jac_err, err);
    jac_over += err >= 1e-5;
    // Richardson combination of the h and 2h central differences removes the
    // O(h^2) truncation term.
    const Eigen::Vector2d db2 =
        (psi_at(p.beta + 2 * h, p.tof) - psi_at(p.beta - 2 * h, p.tof)) / (4 * h);
    const Eigen::Vector2d dt2 =
        (psi_at(p.beta, p.tof + 2 * h) - psi_at(p.beta, p.tof - 2 * h)) / (4 * h);
    const Eigen::Vector2d db_r = (4 * db - db2) / 3;
    const Eigen::Vector2d dt_r = (4 * dt - dt2) / 3;
    jac_err_extrapolated = std::max(
        jac_err_extrapolated, std::max((e.jacobian.col(0) - db_r).norm() / db_r.norm(),
                                       (e.jacobian.col(1) - dt_r).norm() / dt_r.norm()));
    ++jac_checked;
  }

  int converged = 0;
  int bad = 0;
  std::map<CorrectionStatus, int> tally;
  std::vector<CorrectionOutcome> solutions;
  for (std::size_t idx : indices) {
    const CorrectionOutcome o = correct(problem(), grid.at(idx), settings);
    ++tally[o.status];
    if (o.status != CorrectionStatus::converged) continue;
    ++converged;
    solutions.push_back(o);
    const PropagationResult r = problem().model().propagate(
        departure_state(o.params, problem().orbit()), o.params.tof, problem().arc_options());
    const bool closes = r.terminated_by == Termination::completed &&
                        psi_f(r.final, problem().orbit()).norm() < 1e-8;
    const bool inside = o.params.beta >= settings.beta_lower && o.params.beta <= settings.beta_upper &&
                        o.params.tof >= settings.tof_lower && o.params.tof <= settings.tof_upper &&
                        o.params.alpha == grid.at(idx).alpha;
    if (!closes || !inside) ++bad;
  }

  // Basin: the first converged solution of the sample (grid order).
  bool basin = false;
  std::string basin_detail = "no converged solution";
  int basin_hits = 0;
  int basin_tried = 0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const ConstructionParams s = solutions[i].params;
    const CorrectionOutcome o =
        correct(problem(), ConstructionParams{s.alpha, s.beta + 5e-5, s.tof + 1e-3}, settings);
    const double eb = std::abs(o.params.beta - s.beta);
    const double et = std::abs(o.params.tof - s.tof);
    const bool hit = o.status == CorrectionStatus::converged && eb < 1e-7 && et < 1e-7;
    ++basin_tried;
    basin_hits += hit;
    if (i == 0) {
      basin = hit;
      basin_detail = std::string(to_string(o.status)) + ", |dbeta| " + fmt("%.1e", eb) +
                     ", |dtof| " + fmt("%.1e", et);
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = jac_checked == 50 && jac_err < 1e-5 && converged > 0 && bad == 0 && basin;
  std::ostringstream d;
  d << "jacobian vs fd " << fmt("%.2e", jac_err) << " (<1e-5) on " << jac_checked
    << " guesses; " << converged << "/50 converged, " << bad
    << " violating |psi_f|<1e-8 or bounds; basin: " << basin_detail << "; "
    << fmt("%.1f", secs) << " s";
  report(3, "corrector", pass, d.str());
  std::ostringstream t;
  t << "outcomes:";
  for (const auto& [status, n] : tally) t << ' ' << to_string(status) << '=' << n;
  info(t.str());
  info(std::to_string(jac_over) + " guesses at or above 1e-5 with plain central differences; " +
       "richardson-extrapolated differences give max " + fmt("%.2e", jac_err_extrapolated));
  info("basin recovery over all converged samples: " + std::to_string(basin_hits) + "/" +
       std::to_string(basin_tried));
}

// ---------------------------------------------------------------------------

RunConfig desk_config(const fs::path& dir, unsigned workers) {
  RunConfig cfg;
  cfg.grid = desk_grid();
  cfg.workers = workers;
  cfg.checkpoint_interval = 2500;
  cfg.output_dir = dir;
  return cfg;
}

std::string describe(const SweepCounts& c) {
  std::ostringstream s;
  s << "candidates=" << c.candidates << " collided=" << c.collided
    << " integrator_failure=" << c.integrator_failure << " feasible=" << c.feasible
    << " converged=" << c.converged << " stalled=" << c.stalled
    << " bound_locked=" << c.bound_locked
    << " collided_during_iteration=" << c.collided_during_iteration
    << " budget_exhausted=" << c.budget_exhausted;
  return s.str();
}

void sweep_checks(const SweepResult& r) {
  const Catalog& raw = r.raw;
  double min_dv = INFINITY;
  double min_tof = INFINITY;
  double max_dv = -INFINITY;
  double max_tof = -INFINITY;
  std::size_t below = 0;
  for (const auto& s : raw.records()) {
    min_dv = std::min(min_dv, s.dv_km_s);
    max_dv = std::max(max_dv, s.dv_km_s);
    min_tof = std::min(min_tof, s.tof_days);
    max_tof = std::max(max_tof, s.tof_days);
    if (s.dv_km_s < 3.80) ++below;
  }
  const bool pass = r.complete && r.counts.candidates == 90000 && min_dv >= 3.80 &&
                    min_dv <= 3.92 && min_tof >= 2.3 && min_tof <= 2.9 && below == 0 &&
                    r.counts.converged > 1000;
  std::ostringstream d;
  d << r.counts.candidates << " candidates, " << r.counts.converged
    << " converged (>1000); min dv " << fmt("%.4f", min_dv) << " km/s (in [3.80, 3.92]), "
    << below << " below 3.80; min tof " << fmt("%.4f", min_tof) << " d (in [2.3, 2.9]); "
    << fmt("%.0f", r.wall_seconds) << " s";
  report(4, "desk-scale sweep", pass, d.str());
  info(describe(r.counts));
  info("ranges: dv " + fmt("%.4f", min_dv) + "-" + fmt("%.4f", max_dv) + " km/s, tof " +
       fmt("%.4f", min_tof) + "-" + fmt("%.4f", max_tof) + " d; deduplicated catalog " +
       std::to_string(r.deduplicated.size()) + " of " + std::to_string(raw.size()));
}

void branch_checks(const SweepResult& r, const fs::path& maps_dir) {
  const Catalog& raw = r.raw;
  const auto reports = detect_all_branches(raw, 10.0);
  std::size_t populated = 0;
  std::size_t populated_ok = 0;
  std::vector<BranchReport> populated_reports;
  for (const auto& rep : reports) {
    if (rep.solution_count() < 30) continue;
    ++populated;
    populated_ok += rep.band_count() >= 3;
    populated_reports.push_back(rep);
  }
  const auto modal = modal_band_count(reports);
  const auto spacing = median_center_spacing(reports);

  // Gap structure read back from the exported (TOF, alpha) table.
  export_maps(raw, maps_dir, {MapKind::tof_alpha});
  const MapTable table = read_map_csv(maps_dir / "tof_alpha.csv", MapKind::tof_alpha);
  std::map<double, std::vector<double>> by_alpha;
  for (const MapRow& row : table.rows) by_alpha[row.y].push_back(row.x);
  std::size_t csv_populated = 0;
  std::size_t separated = 0;
  for (auto& [alpha, tofs] : by_alpha) {
    if (tofs.size() < 30) continue;
    ++csv_populated;
    std::sort(tofs.begin(), tofs.end());
    double max_intra = 0.0;
    double min_inter = INFINITY;
    for (std::size_t i = 1; i < tofs.size(); ++i) {
      const double gap = tofs[i] - tofs[i - 1];
      if (gap > 10.0) {
        min_inter = std::min(min_inter, gap);
      } else {
        max_intra = std::max(max_intra, gap);
      }
    }
    if (max_intra < 10.0 && min_inter > 15.0) ++separated;
  }
  const double separated_frac =
      csv_populated ? static_cast<double>(separated) / static_cast<double>(csv_populated) : 0.0;

  const bool pass = populated > 0 && populated_ok == populated && modal && *modal >= 5 &&
                    *modal <= 7 && spacing && *spacing >= 25.0 && *spacing <= 32.0 &&
                    separated_frac >= 0.8;
  std::ostringstream d;
  d << populated_ok << "/" << populated << " populated alpha with >=3 bands; modal band count "
    << (modal ? std::to_string(*modal) : "n/a") << " (in [5, 7]); median spacing "
    << (spacing ? fmt("%.2f", *spacing) : "n/a") << " d (in [25, 32]); gap-separated in csv "
    << separated << "/" << csv_populated << " (>=80%)";
  report(5, "branch structure", pass, d.str());

  std::ostringstream bands;
  bands << "band counts per alpha:";
  for (const auto& rep : reports) bands << ' ' << rep.band_count();
  info(bands.str());
  const SlopeSummary slopes = band_slopes(reports, 10.0);
  info("band slope " + fmt("%.4f", slopes.mean_slope) + " rad/d, relative dispersion " +
       fmt("%.3f", slopes.relative_dispersion) + " over " + std::to_string(slopes.fitted) +
       " tracked bands (informational, <0.25 expected)");
  const auto dedup_reports = detect_all_branches(r.deduplicated, 10.0);
  const auto dedup_modal = modal_band_count(dedup_reports);
  const auto dedup_spacing = median_center_spacing(dedup_reports);
  info("deduplicated catalog: modal band count " +
       (dedup_modal ? std::to_string(*dedup_modal) : std::string("n/a")) + ", median spacing " +
       (dedup_spacing ? fmt("%.2f", *dedup_spacing) : std::string("n/a")) + " d");
}

void units_check() {
  const double days = SystemConstants{}.dimensional_time(10.0 * kPi);
  report(6, "time-unit pin", std::abs(days - 136.58) <= 0.5,
         "10pi TU = " + fmt("%.4f", days) + " d (136.58 +/- 0.5)");
}

void determinism_check(const SweepResult& a, const SweepResult& b, unsigned workers_a,
                       const fs::path& dir_a, const fs::path& dir_b) {
  const auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const RunFiles fa = RunFiles::in(dir_a);
  const RunFiles fb = RunFiles::in(dir_b);
  const bool same_records = a.raw.records() == b.raw.records();
  const bool same_counts = a.counts == b.counts;
  const bool same_files = bytes(fa.raw_catalog) == bytes(fb.raw_catalog) &&
                          bytes(fa.catalog) == bytes(fb.catalog);
  const bool pass = a.complete && b.complete && same_records && same_counts && same_files;
  std::ostringstream d;
  d << "second run (1 worker) vs first (" << workers_a << " workers): records "
    << (same_records ? "identical" : "DIFFER") << " (" << a.raw.size() << "), counts "
    << (same_counts ? "identical" : "DIFFER") << ", catalog files "
    << (same_files ? "byte-identical" : "DIFFER");
  report(7, "determinism", pass, d.str());
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--workdir" && i + 1 < argc) {
      opt.workdir = argv[++i];
    } else if (a == "--workers" && i + 1 < argc) {
      opt.workers = static_cast<unsigned>(std::stoul(argv[++i]));
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) opt.only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--workdir DIR] [--workers N] [--only 1,2,...]\n", argv[0]);
      return 2;
    }
  }
  const auto wanted = [&](int id) { return opt.only.empty() || opt.only.contains(id); };

  if (wanted(1)) dynamics_suite();
  if (wanted(2)) boundary_suite();
  if (wanted(3)) corrector_suite();
  if (wanted(6)) units_check();

  if (wanted(4) || wanted(5) || wanted(7)) {
    fs::create_directories(opt.workdir);
    const fs::path dir_a = opt.workdir / "sweep_a";
    const fs::path dir_b = opt.workdir / "sweep_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    const SweepResult a = run_sweep(desk_config(dir_a, opt.workers));
    if (wanted(4)) sweep_checks(a);
    if (wanted(5)) branch_checks(a, opt.workdir / "maps");
    if (wanted(7)) {
      const SweepResult b = run_sweep(desk_config(dir_b, 1));
      determinism_check(a, b, opt.workers, dir_a, dir_b);
    }
  }

  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
