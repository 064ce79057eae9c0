#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "lunarmap/analysis.hpp"
#include "lunarmap/config.hpp"
#include "lunarmap/sweep.hpp"

namespace lunarmap::app {

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

namespace {

struct AxisOverride {
  std::string min;
  std::string max;
  std::string step;

  void apply(GridAxis& axis) const {
    if (!min.empty()) axis.min = parse_scalar(min);
    if (!max.empty()) axis.max = parse_scalar(max);
    if (!step.empty()) axis.step = parse_scalar(step);
  }
};

struct SearchArgs {
  std::string config;
  std::string output;
  unsigned workers = 0;
  AxisOverride alpha;
  AxisOverride beta;
  AxisOverride tof;
  std::size_t checkpoint_interval = 0;
  std::string screen_threshold;
  std::uint64_t stop_after = 0;
  bool quiet = false;
};

void add_axis_flags(CLI::App* cmd, const std::string& name, AxisOverride& axis) {
  cmd->add_option("--" + name + "-min", axis.min, name + " lower bound (number or pi expression)");
  cmd->add_option("--" + name + "-max", axis.max, name + " upper bound");
  cmd->add_option("--" + name + "-step", axis.step, name + " grid step");
}

void print_counts(std::ostream& out, const SweepCounts& c) {
  out << "candidates                 " << c.candidates << '\n'
      << "  collided                 " << c.collided << '\n'
      << "  integrator_failure       " << c.integrator_failure << '\n'
      << "  feasible                 " << c.feasible << '\n'
      << "    screened_out           " << c.screened_out << '\n'
      << "    converged              " << c.converged << '\n'
      << "    stalled                " << c.stalled << '\n'
      << "    bound_locked           " << c.bound_locked << '\n'
      << "    collided_during_iter   " << c.collided_during_iteration << '\n'
      << "    budget_exhausted       " << c.budget_exhausted << '\n';
}

int report_sweep(const SweepResult& r, const std::filesystem::path& dir, std::ostream& out,
                 std::ostream& err) {
  print_counts(out, r.counts);
  if (!r.complete) {
    err << "sweep stopped at " << r.counts.candidates << " of " << r.total_candidates
        << " candidates; continue with: lunarmap resume --output " << dir.string() << '\n';
    return kInterrupted;
  }
  out << "solutions (raw)            " << r.raw.size() << '\n'
      << "solutions (deduplicated)   " << r.deduplicated.size() << '\n'
      << "wall time [s]              " << std::fixed << std::setprecision(1) << r.wall_seconds
      << std::defaultfloat << '\n'
      << "catalog                    " << RunFiles::in(dir).catalog.string() << '\n';
  return kOk;
}

SweepControl make_control(std::uint64_t stop_after, bool quiet, std::ostream& err) {
  SweepControl control;
  control.cancel = &interrupt_flag();
  if (stop_after > 0) control.stop_after = stop_after;
  if (!quiet) {
    control.progress = [&err](std::uint64_t done, std::uint64_t total) {
      err << "\rprogress " << done << "/" << total << std::flush;
      if (done == total) err << '\n';
    };
  }
  return control;
}

int cmd_search(const SearchArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (!a.output.empty()) cfg.output_dir = a.output;
  if (a.workers > 0) cfg.workers = a.workers;
  a.alpha.apply(cfg.grid.alpha);
  a.beta.apply(cfg.grid.beta);
  a.tof.apply(cfg.grid.tof);
  if (a.checkpoint_interval > 0) cfg.checkpoint_interval = a.checkpoint_interval;
  if (!a.screen_threshold.empty()) {
    if (a.screen_threshold == "off") {
      cfg.screen_threshold.reset();
    } else {
      cfg.screen_threshold = parse_scalar(a.screen_threshold);
    }
  }
  cfg.validate();

  if (cfg.grid.size() == 0) {
    err << "warning: the grid is empty; writing an empty catalog\n";
  }
  const SweepResult r = run_sweep(cfg, make_control(a.stop_after, a.quiet, err));
  return report_sweep(r, cfg.output_dir, out, err);
}

int cmd_resume(const SearchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.output.empty()) throw ConfigError("resume needs --output <run directory>");
  std::optional<RunConfig> expected;
  if (!a.config.empty()) expected = load_config(a.config);
  std::optional<unsigned> workers;
  if (a.workers > 0) workers = a.workers;
  const SweepResult r =
      resume_sweep(a.output, expected, make_control(a.stop_after, a.quiet, err), workers);
  return report_sweep(r, a.output, out, err);
}

int cmd_export(const std::string& catalog_path, const std::string& dir,
               const std::vector<std::string>& names, std::ostream& out) {
  const Catalog catalog = Catalog::load(catalog_path);
  std::vector<MapKind> which;
  for (const auto& n : names) {
    const auto kind = parse_map_name(n);
    if (!kind) throw ConfigError("unknown map '" + n + "'");
    which.push_back(*kind);
  }
  if (which.empty()) which.assign(kAllMaps.begin(), kAllMaps.end());
  for (const auto& p : export_maps(catalog, dir, which)) {
    out << p.string() << " (" << catalog.size() << " rows)\n";
  }
  return kOk;
}

int cmd_branches(const std::string& catalog_path, const std::string& alpha_text, double threshold,
                 const std::string& csv_path, std::ostream& out) {
  const Catalog catalog = Catalog::load(catalog_path);
  if (catalog.empty()) throw ConfigError("catalog has no solutions");
  std::vector<BranchReport> reports;
  if (!alpha_text.empty()) {
    const double alpha = parse_scalar(alpha_text);
    try {
      reports.push_back(detect_branches(catalog, alpha, threshold));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    reports = detect_all_branches(catalog, threshold);
  }

  out << std::fixed;
  for (const auto& r : reports) {
    out << "alpha " << std::setprecision(6) << r.alpha << "  solutions " << r.solution_count()
        << "  bands " << r.band_count() << "  centers [d]";
    for (const auto& b : r.bands) out << ' ' << std::setprecision(2) << b.center_days;
    out << '\n';
  }
  if (reports.size() > 1) {
    const auto modal = modal_band_count(reports);
    const auto spacing = median_center_spacing(reports);
    const SlopeSummary slopes = band_slopes(reports, threshold);
    out << "modal band count " << (modal ? std::to_string(*modal) : "n/a") << '\n';
    if (spacing) out << "median center spacing [d] " << std::setprecision(3) << *spacing << '\n';
    if (slopes.fitted > 0) {
      out << "band slope [rad/d] " << std::setprecision(4) << slopes.mean_slope
          << "  relative dispersion " << slopes.relative_dispersion << "  over " << slopes.fitted
          << " tracked bands\n";
    }
  }
  out << std::defaultfloat;

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    csv.precision(17);
    csv << "alpha_rad,band,tof_min_days,tof_max_days,center_days,count,max_internal_gap_days\n";
    for (const auto& r : reports) {
      for (std::size_t i = 0; i < r.bands.size(); ++i) {
        const Band& b = r.bands[i];
        csv << r.alpha << ',' << i << ',' << b.tof_min_days << ',' << b.tof_max_days << ','
            << b.center_days << ',' << b.count << ',' << b.max_internal_gap_days << '\n';
      }
    }
  }
  return kOk;
}

struct PropagateArgs {
  std::string alpha;
  std::string beta;
  std::string tof;
  std::string catalog;
  std::uint64_t id = 0;
  bool has_id = false;
  std::string config;
  std::size_t samples = 1000;
  std::string output;
};

int cmd_propagate(const PropagateArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  ConstructionParams p;
  if (!a.catalog.empty()) {
    const Catalog catalog = Catalog::load(a.catalog);
    if (!a.has_id) throw ConfigError("--catalog needs --id");
    const TransferSolution* s = catalog.find(a.id);
    if (!s) throw ConfigError("no record with id " + std::to_string(a.id));
    p = s->params;
    cfg.constants = catalog.header().constants;
    cfg.departure_altitude_km = catalog.header().departure_altitude_km;
    cfg.arrival_altitude_km = catalog.header().arrival_altitude_km;
  } else {
    if (a.alpha.empty() || a.beta.empty() || a.tof.empty()) {
      throw ConfigError("give --alpha, --beta and --tof, or --catalog with --id");
    }
    p = {parse_scalar(a.alpha), parse_scalar(a.beta), parse_scalar(a.tof)};
  }
  if (!(p.tof > 0.0) || !std::isfinite(p.tof)) throw ConfigError("tof must be positive");
  if (a.samples < 2) throw ConfigError("--samples must be at least 2");

  const TransferProblem problem(SystemConstants(cfg.constants), cfg.departure_altitude_km,
                                cfg.arrival_altitude_km);
  PropagationOptions opts = problem.arc_options();
  for (std::size_t k = 0; k < a.samples; ++k) {
    opts.sample_times.push_back(p.tof * static_cast<double>(k) / static_cast<double>(a.samples - 1));
  }
  const PlanarState s0 = departure_state(p, problem.orbit());
  const PropagationResult r = problem.model().propagate(s0, p.tof, opts);

  std::ofstream file;
  std::ostream* csv = &out;
  std::ostream* info = &err;
  if (!a.output.empty()) {
    file.open(a.output, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + a.output);
    csv = &file;
    info = &out;
  }
  csv->precision(17);
  *csv << "t,x,y,u,v\n";
  for (const TimedState& ts : r.samples) {
    *csv << ts.t << ',' << ts.state.x << ',' << ts.state.y << ',' << ts.state.u << ','
         << ts.state.v << '\n';
  }

  info->precision(10);
  *info << "termination " << to_string(r.terminated_by) << " at t = " << r.time << " TU\n";
  if (r.terminated_by == Termination::completed) {
    const Eigen::Vector2d psi = psi_f(r.final, problem.orbit());
    *info << "psi_f " << std::scientific << psi[0] << ' ' << psi[1] << "  norm " << psi.norm()
          << std::defaultfloat << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Earth-Moon bi-impulsive transfer maps"};
  app.require_subcommand(1);

  SearchArgs search;
  CLI::App* search_cmd = app.add_subcommand("search", "run a grid search and correction sweep");
  search_cmd->add_option("-c,--config", search.config, "JSON run configuration")->check(CLI::ExistingFile);
  search_cmd->add_option("-o,--output", search.output, "run directory");
  search_cmd->add_option("-w,--workers", search.workers, "worker threads")->check(CLI::PositiveNumber);
  add_axis_flags(search_cmd, "alpha", search.alpha);
  add_axis_flags(search_cmd, "beta", search.beta);
  add_axis_flags(search_cmd, "tof", search.tof);
  search_cmd->add_option("--checkpoint-interval", search.checkpoint_interval,
                         "candidates between checkpoint flushes");
  search_cmd->add_option("--screen-threshold", search.screen_threshold,
                         "correct only guesses with |psi_f| below this ('off' corrects all)");
  search_cmd->add_option("--stop-after", search.stop_after,
                         "stop after this many candidates (resumable)");
  search_cmd->add_flag("-q,--quiet", search.quiet, "no progress output");

  SearchArgs resume;
  CLI::App* resume_cmd = app.add_subcommand("resume", "continue an interrupted sweep");
  resume_cmd->add_option("-o,--output", resume.output, "run directory")->required();
  resume_cmd->add_option("-c,--config", resume.config, "configuration the run must match")
      ->check(CLI::ExistingFile);
  resume_cmd->add_option("-w,--workers", resume.workers, "worker threads")->check(CLI::PositiveNumber);
  resume_cmd->add_option("--stop-after", resume.stop_after, "stop again after this many candidates");
  resume_cmd->add_flag("-q,--quiet", resume.quiet, "no progress output");

  std::string export_catalog;
  std::string export_dir = ".";
  std::vector<std::string> export_maps_list;
  CLI::App* export_cmd = app.add_subcommand("export-maps", "write the solution-space map CSVs");
  export_cmd->add_option("--catalog", export_catalog, "catalog file")->required();
  export_cmd->add_option("-o,--output", export_dir, "output directory");
  export_cmd->add_option("--maps", export_maps_list, "tof_dv tof_alpha alpha_beta tof_beta");

  std::string branches_catalog;
  std::string branches_alpha;
  double branches_threshold = 10.0;
  std::string branches_csv;
  CLI::App* branches_cmd = app.add_subcommand("branches", "detect TOF bands per departure angle");
  branches_cmd->add_option("--catalog", branches_catalog, "catalog file")->required();
  branches_cmd->add_option("--alpha", branches_alpha, "single alpha (rad) instead of all");
  branches_cmd->add_option("--threshold", branches_threshold, "gap threshold in days");
  branches_cmd->add_option("--csv", branches_csv, "write the band table here");

  PropagateArgs prop;
  CLI::App* prop_cmd = app.add_subcommand("propagate", "sample one transfer arc");
  prop_cmd->add_option("--alpha", prop.alpha, "departure angle (rad)");
  prop_cmd->add_option("--beta", prop.beta, "speed ratio");
  prop_cmd->add_option("--tof", prop.tof, "time of flight (TU)");
  prop_cmd->add_option("--catalog", prop.catalog, "take parameters from this catalog");
  auto* id_opt = prop_cmd->add_option("--id", prop.id, "record id in the catalog");
  prop_cmd->add_option("-c,--config", prop.config, "JSON run configuration")->check(CLI::ExistingFile);
  prop_cmd->add_option("--samples", prop.samples, "number of output samples");
  prop_cmd->add_option("-o,--output", prop.output, "trajectory CSV (stdout when omitted)");

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }
  prop.has_id = id_opt->count() > 0;

  try {
    if (search_cmd->parsed()) return cmd_search(search, out, err);
    if (resume_cmd->parsed()) return cmd_resume(resume, out, err);
    if (export_cmd->parsed()) return cmd_export(export_catalog, export_dir, export_maps_list, out);
    if (branches_cmd->parsed()) {
      if (!(branches_threshold > 0.0)) throw ConfigError("--threshold must be positive");
      return cmd_branches(branches_catalog, branches_alpha, branches_threshold, branches_csv, out);
    }
    if (prop_cmd->parsed()) return cmd_propagate(prop, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const CatalogError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInputError;
}

}  // namespace lunarmap::app
