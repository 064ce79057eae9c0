#pragma once

#include <cstddef>
#include <cstdint>
#include <ranges>

#include "lunarmap/transfer.hpp"

namespace lunarmap {

/// One sweep axis. Values are min + k * step; `closed` decides whether max
/// itself belongs to the axis.
struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;
  bool closed = true;

  /// Number of values; zero when min > max. A degenerate axis (min == max)
  /// always holds the single value min. Throws for non-positive step.
  std::size_t count() const;
  double value(std::size_t k) const { return min + static_cast<double>(k) * step; }
};

/// Sweep over (alpha, beta, tof). Alpha is half-open, beta and tof closed.
struct GridSpec {
  GridAxis alpha{0.0, kTwoPi, kPi / 36.0, false};
  GridAxis beta{1.4, 1.414, 0.0002, true};
  GridAxis tof{kPi / 50.0, 10.0 * kPi, kPi / 50.0, true};

  std::size_t size() const { return alpha.count() * beta.count() * tof.count(); }

  /// Lexicographic: alpha slowest, tof fastest.
  ConstructionParams at(std::size_t index) const;
  std::size_t index_of(std::size_t ia, std::size_t ib, std::size_t it) const {
    return (ia * beta.count() + ib) * tof.count() + it;
  }

  std::uint64_t fingerprint() const;
};

/// Lazily enumerates every grid point in index order.
inline auto enumerate_grid(const GridSpec& grid) {
  return std::views::iota(std::size_t{0}, grid.size()) |
         std::views::transform([grid](std::size_t i) { return grid.at(i); });
}

}  // namespace lunarmap
