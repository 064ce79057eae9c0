#include "lunarmap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lunarmap {

Catalog deduplicate(const Catalog& catalog, const DedupTolerance& tol) {
  if (!(tol.beta > 0.0) || !(tol.tof > 0.0)) {
    throw std::invalid_argument("deduplication tolerances must be positive");
  }
  const auto& records = catalog.records();

  std::map<double, std::vector<std::size_t>> by_alpha;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_alpha[records[i].params.alpha].push_back(i);
  }

  std::vector<bool> keep(records.size(), false);
  for (auto& [alpha, group] : by_alpha) {
    std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
      if (records[a].residual_norm != records[b].residual_norm) {
        return records[a].residual_norm < records[b].residual_norm;
      }
      return records[a].id < records[b].id;
    });
    std::multimap<double, std::size_t> kept;  // tof -> record index
    for (std::size_t i : group) {
      const TransferSolution& r = records[i];
      bool duplicate = false;
      for (auto it = kept.lower_bound(r.params.tof - tol.tof);
           it != kept.end() && it->first <= r.params.tof + tol.tof; ++it) {
        if (std::abs(records[it->second].params.beta - r.params.beta) <= tol.beta) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) {
        kept.emplace(r.params.tof, i);
        keep[i] = true;
      }
    }
  }

  CatalogHeader header = catalog.header();
  header.deduplicated = true;
  Catalog out(header);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.record(records[i]);
  }
  out.header().source_count = catalog.header().source_count;
  return out;
}

std::string map_name(MapKind kind) {
  switch (kind) {
    case MapKind::tof_dv:
      return "tof_dv";
    case MapKind::tof_alpha:
      return "tof_alpha";
    case MapKind::alpha_beta:
      return "alpha_beta";
    case MapKind::tof_beta:
      return "tof_beta";
  }
  return "unknown";
}

std::optional<MapKind> parse_map_name(const std::string& name) {
  for (MapKind k : kAllMaps) {
    if (map_name(k) == name) return k;
  }
  return std::nullopt;
}

MapTable build_map(const Catalog& catalog, MapKind kind) {
  MapTable t;
  t.kind = kind;
  switch (kind) {
    case MapKind::tof_dv:
      t.x_column = "tof_days";
      t.y_column = "dv_km_s";
      break;
    case MapKind::tof_alpha:
      t.x_column = "tof_days";
      t.y_column = "alpha_rad";
      break;
    case MapKind::alpha_beta:
      t.x_column = "alpha_rad";
      t.y_column = "beta";
      break;
    case MapKind::tof_beta:
      t.x_column = "tof_days";
      t.y_column = "beta";
      break;
  }
  t.rows.reserve(catalog.size());
  for (const TransferSolution* s : catalog.sorted_view()) {
    MapRow row{s->id, 0.0, 0.0};
    switch (kind) {
      case MapKind::tof_dv:
        row.x = s->tof_days;
        row.y = s->dv_km_s;
        break;
      case MapKind::tof_alpha:
        row.x = s->tof_days;
        row.y = s->params.alpha;
        break;
      case MapKind::alpha_beta:
        row.x = s->params.alpha;
        row.y = s->params.beta;
        break;
      case MapKind::tof_beta:
        row.x = s->tof_days;
        row.y = s->params.beta;
        break;
    }
    t.rows.push_back(row);
  }
  return t;
}

std::vector<std::filesystem::path> export_maps(const Catalog& catalog,
                                               const std::filesystem::path& dir,
                                               const std::vector<MapKind>& which) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (MapKind kind : which) {
    const MapTable t = build_map(catalog, kind);
    const std::filesystem::path path = dir / (map_name(kind) + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "id," << t.x_column << ',' << t.y_column << '\n';
    for (const MapRow& r : t.rows) out << r.id << ',' << r.x << ',' << r.y << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

MapTable read_map_csv(const std::filesystem::path& path, MapKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  MapTable t;
  t.kind = kind;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing header in " + path.string());
  {
    std::istringstream hs(line);
    std::string id;
    std::getline(hs, id, ',');
    std::getline(hs, t.x_column, ',');
    std::getline(hs, t.y_column, ',');
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    t.rows.push_back({std::stoull(a), std::stod(b), std::stod(c)});
  }
  return t;
}

std::size_t BranchReport::solution_count() const {
  std::size_t n = 0;
  for (const Band& b : bands) n += b.count;
  return n;
}

namespace {

BranchReport split_bands(double alpha, std::vector<std::pair<double, std::uint64_t>> tofs,
                         double gap_threshold_days) {
  std::sort(tofs.begin(), tofs.end());
  BranchReport report;
  report.alpha = alpha;
  Band current;
  double sum = 0.0;
  auto close = [&] {
    current.center_days = sum / static_cast<double>(current.count);
    report.bands.push_back(std::move(current));
    current = Band{};
    sum = 0.0;
  };
  for (std::size_t i = 0; i < tofs.size(); ++i) {
    const auto [t, id] = tofs[i];
    if (current.count > 0) {
      const double gap = t - current.tof_max_days;
      if (gap > gap_threshold_days) {
        report.gaps_days.push_back(gap);
        close();
      } else {
        current.max_internal_gap_days = std::max(current.max_internal_gap_days, gap);
      }
    }
    if (current.count == 0) current.tof_min_days = t;
    current.tof_max_days = t;
    current.members.push_back(id);
    ++current.count;
    sum += t;
  }
  if (current.count > 0) close();
  return report;
}

}  // namespace

BranchReport detect_branches(const Catalog& catalog, double alpha, double gap_threshold_days) {
  if (!(gap_threshold_days > 0.0)) throw std::invalid_argument("gap threshold must be positive");
  std::vector<std::pair<double, std::uint64_t>> tofs;
  for (const auto& r : catalog.records()) {
    if (std::abs(r.params.alpha - alpha) <= 1e-12) tofs.emplace_back(r.tof_days, r.id);
  }
  if (tofs.empty()) throw std::invalid_argument("no solutions at the requested alpha");
  return split_bands(alpha, std::move(tofs), gap_threshold_days);
}

std::vector<double> distinct_alphas(const Catalog& catalog) {
  std::vector<double> alphas;
  for (const auto& r : catalog.records()) alphas.push_back(r.params.alpha);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  return alphas;
}

std::vector<BranchReport> detect_all_branches(const Catalog& catalog, double gap_threshold_days) {
  if (!(gap_threshold_days > 0.0)) throw std::invalid_argument("gap threshold must be positive");
  std::map<double, std::vector<std::pair<double, std::uint64_t>>> groups;
  for (const auto& r : catalog.records()) groups[r.params.alpha].emplace_back(r.tof_days, r.id);
  std::vector<BranchReport> reports;
  reports.reserve(groups.size());
  for (auto& [alpha, tofs] : groups) {
    reports.push_back(split_bands(alpha, std::move(tofs), gap_threshold_days));
  }
  return reports;
}

std::optional<double> median_center_spacing(const std::vector<BranchReport>& reports) {
  std::vector<double> spacing;
  for (const auto& r : reports) {
    for (std::size_t i = 1; i < r.bands.size(); ++i) {
      spacing.push_back(r.bands[i].center_days - r.bands[i - 1].center_days);
    }
  }
  if (spacing.empty()) return std::nullopt;
  std::sort(spacing.begin(), spacing.end());
  const std::size_t n = spacing.size();
  return n % 2 == 1 ? spacing[n / 2] : 0.5 * (spacing[n / 2 - 1] + spacing[n / 2]);
}

std::optional<std::size_t> modal_band_count(const std::vector<BranchReport>& reports) {
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& r : reports) ++histogram[r.band_count()];
  if (histogram.empty()) return std::nullopt;
  std::size_t best = 0;
  std::size_t best_n = 0;
  for (const auto& [count, n] : histogram) {
    if (n > best_n) {
      best = count;
      best_n = n;
    }
  }
  return best;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

SlopeEstimate fit_band_slope(const std::vector<BandPoint>& points) {
  SlopeEstimate est;
  std::vector<BandPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end(),
            [](const BandPoint& a, const BandPoint& b) { return a.center_days < b.center_days; });
  std::vector<double> alphas;
  for (const auto& p : sorted) alphas.push_back(p.alpha);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  if (alphas.size() < 2) return est;

  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : sorted) {
    x.push_back(p.center_days);
    y.push_back(p.alpha);
  }
  // Start from continuity along increasing TOF, then let each point take the
  // 2π shift that best matches the fit of the others until nothing moves.
  for (std::size_t i = 1; i < y.size(); ++i) {
    y[i] += kTwoPi * std::round((y[i - 1] - y[i]) / kTwoPi);
  }
  LineFit fit = least_squares(x, y);
  for (int pass = 0; pass < 8; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double predicted = fit.intercept + fit.slope * x[i];
      const double shifted = y[i] + kTwoPi * std::round((predicted - y[i]) / kTwoPi);
      if (shifted != y[i]) {
        y[i] = shifted;
        moved = true;
      }
    }
    if (!moved) break;
    fit = least_squares(x, y);
  }
  est.sufficient = true;
  est.slope = fit.slope;
  est.intercept = fit.intercept;
  est.rms = fit.rms;
  est.unwrapped_alpha = y;
  return est;
}

std::vector<std::vector<BandPoint>> track_bands(const std::vector<BranchReport>& reports,
                                                double link_tolerance_days) {
  std::vector<const BranchReport*> ordered;
  for (const auto& r : reports) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const BranchReport* a, const BranchReport* b) { return a->alpha < b->alpha; });

  std::vector<std::vector<BandPoint>> tracks;
  // Track index of each band of the previous report.
  std::vector<std::size_t> previous_tracks;
  const BranchReport* previous = nullptr;
  for (const BranchReport* r : ordered) {
    std::vector<std::size_t> current(r->bands.size(), SIZE_MAX);
    std::vector<bool> claimed(previous ? previous->bands.size() : 0, false);
    for (std::size_t b = 0; b < r->bands.size(); ++b) {
      const double c = r->bands[b].center_days;
      std::size_t best = SIZE_MAX;
      double best_d = link_tolerance_days;
      if (previous) {
        for (std::size_t p = 0; p < previous->bands.size(); ++p) {
          const double d = std::abs(previous->bands[p].center_days - c);
          if (!claimed[p] && d <= best_d) {
            best = p;
            best_d = d;
          }
        }
      }
      if (best != SIZE_MAX) {
        claimed[best] = true;
        current[b] = previous_tracks[best];
      } else {
        current[b] = tracks.size();
        tracks.emplace_back();
      }
      tracks[current[b]].push_back({c, r->alpha});
    }
    previous = r;
    previous_tracks = std::move(current);
  }
  return tracks;
}

SlopeSummary band_slopes(const std::vector<BranchReport>& reports, double link_tolerance_days,
                         std::size_t min_points) {
  SlopeSummary summary;
  for (const auto& track : track_bands(reports, link_tolerance_days)) {
    SlopeEstimate est = fit_band_slope(track);
    if (est.sufficient && track.size() >= std::max<std::size_t>(min_points, 2)) {
      summary.bands.push_back(std::move(est));
    }
  }
  summary.fitted = summary.bands.size();
  if (summary.fitted == 0) return summary;
  double sum = 0.0;
  for (const auto& b : summary.bands) sum += b.slope;
  summary.mean_slope = sum / static_cast<double>(summary.fitted);
  double var = 0.0;
  for (const auto& b : summary.bands) var += (b.slope - summary.mean_slope) * (b.slope - summary.mean_slope);
  var /= static_cast<double>(summary.fitted);
  summary.relative_dispersion =
      summary.mean_slope != 0.0 ? std::sqrt(var) / std::abs(summary.mean_slope) : 0.0;
  return summary;
}

}  // namespace lunarmap
