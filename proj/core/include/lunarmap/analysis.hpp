#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lunarmap/catalog.hpp"

namespace lunarmap {

// ---------------------------------------------------------------------------
// Deduplication
// ---------------------------------------------------------------------------

struct DedupTolerance {
  double beta = 1e-6;
  /// TU
  double tof = 1e-5;
};

/// Collapses records at the same alpha whose beta and tof both lie within
/// tolerance of an already kept record. Lower residual wins (then lower id).
/// The input size is kept in header().source_count. Idempotent.
Catalog deduplicate(const Catalog& catalog, const DedupTolerance& tol = {});

// ---------------------------------------------------------------------------
// Solution-space maps
// ---------------------------------------------------------------------------

enum class MapKind { tof_dv, tof_alpha, alpha_beta, tof_beta };

inline constexpr std::array<MapKind, 4> kAllMaps = {MapKind::tof_dv, MapKind::tof_alpha,
                                                    MapKind::alpha_beta, MapKind::tof_beta};

struct MapRow {
  std::uint64_t id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct MapTable {
  MapKind kind = MapKind::tof_dv;
  std::string x_column;
  std::string y_column;
  std::vector<MapRow> rows;
};

/// File stem used for a map ("tof_dv", ...).
std::string map_name(MapKind kind);
std::optional<MapKind> parse_map_name(const std::string& name);

/// Projects the catalog onto one map. TOF in days, dv in km/s, alpha in rad.
MapTable build_map(const Catalog& catalog, MapKind kind);

/// Writes `<dir>/<name>.csv` per requested map (header always present).
std::vector<std::filesystem::path> export_maps(const Catalog& catalog,
                                               const std::filesystem::path& dir,
                                               const std::vector<MapKind>& which = {
                                                   kAllMaps.begin(), kAllMaps.end()});

/// Reads a map CSV back (id, x, y per row).
MapTable read_map_csv(const std::filesystem::path& path, MapKind kind);

// ---------------------------------------------------------------------------
// TOF branch structure
// ---------------------------------------------------------------------------

struct Band {
  double tof_min_days = 0.0;
  double tof_max_days = 0.0;
  double center_days = 0.0;  ///< mean TOF of the members
  double max_internal_gap_days = 0.0;
  std::size_t count = 0;
  std::vector<std::uint64_t> members;
};

struct BranchReport {
  double alpha = 0.0;
  std::vector<Band> bands;        ///< ascending TOF, disjoint
  std::vector<double> gaps_days;  ///< bands.size() - 1 separations
  std::size_t band_count() const { return bands.size(); }
  std::size_t solution_count() const;
};

/// Sorts the TOFs of the solutions at `alpha` and splits wherever two
/// consecutive values are more than `gap_threshold_days` apart.
/// Throws std::invalid_argument for a non-positive threshold or when no
/// solution sits at this alpha.
BranchReport detect_branches(const Catalog& catalog, double alpha, double gap_threshold_days = 10.0);

/// Every distinct alpha in the catalog, ascending.
std::vector<double> distinct_alphas(const Catalog& catalog);

std::vector<BranchReport> detect_all_branches(const Catalog& catalog,
                                              double gap_threshold_days = 10.0);

/// Median spacing between consecutive band centers, pooled over reports.
std::optional<double> median_center_spacing(const std::vector<BranchReport>& reports);

/// Most frequent band count (ties resolve to the smaller count).
std::optional<std::size_t> modal_band_count(const std::vector<BranchReport>& reports);

// ---------------------------------------------------------------------------
// Band slopes in the (TOF, alpha) plane
// ---------------------------------------------------------------------------

struct BandPoint {
  double center_days = 0.0;
  double alpha = 0.0;
};

struct SlopeEstimate {
  bool sufficient = false;  ///< false when fewer than two alpha values
  double slope = 0.0;       ///< rad/day
  double intercept = 0.0;
  double rms = 0.0;
  std::vector<double> unwrapped_alpha;  ///< alpha + 2πk per point
};

/// Least-squares alpha = intercept + slope * tof with each alpha shifted by
/// the multiple of 2π that best fits the line.
SlopeEstimate fit_band_slope(const std::vector<BandPoint>& points);

/// Links bands of consecutive alphas whose centers lie within
/// `link_tolerance_days`, giving one point list per branch.
std::vector<std::vector<BandPoint>> track_bands(const std::vector<BranchReport>& reports,
                                                double link_tolerance_days = 10.0);

struct SlopeSummary {
  std::vector<SlopeEstimate> bands;
  double mean_slope = 0.0;
  /// Standard deviation over |mean| across bands with enough data.
  double relative_dispersion = 0.0;
  std::size_t fitted = 0;
};

/// Fits every tracked branch spanning at least `min_points` alpha values.
SlopeSummary band_slopes(const std::vector<BranchReport>& reports,
                         double link_tolerance_days = 10.0, std::size_t min_points = 2);

}  // namespace lunarmap
