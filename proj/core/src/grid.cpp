#include "lunarmap/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "lunarmap/hash.hpp"

namespace lunarmap {

namespace {
// Absorbs rounding in (max - min) / step for steps like pi/36.
constexpr double kCountSlack = 1e-9;
}  // namespace

std::size_t GridAxis::count() const {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("grid step must be positive and finite");
  }
  if (!std::isfinite(min) || !std::isfinite(max)) {
    throw std::invalid_argument("grid bounds must be finite");
  }
  if (min > max) return 0;
  if (min == max) return 1;
  const double span = (max - min) / step;
  if (closed) return static_cast<std::size_t>(std::floor(span + kCountSlack)) + 1;
  return static_cast<std::size_t>(std::ceil(span - kCountSlack));
}

ConstructionParams GridSpec::at(std::size_t index) const {
  const std::size_t nt = tof.count();
  const std::size_t nb = beta.count();
  if (index >= size()) throw std::out_of_range("grid index out of range");
  const std::size_t it = index % nt;
  const std::size_t ib = (index / nt) % nb;
  const std::size_t ia = index / (nt * nb);
  return {alpha.value(ia), beta.value(ib), tof.value(it)};
}

std::uint64_t GridSpec::fingerprint() const {
  Fingerprint f;
  f.add("grid/v1");
  for (const GridAxis* a : {&alpha, &beta, &tof}) {
    f.add(a->min).add(a->max).add(a->step).add(std::uint64_t{a->closed});
  }
  return f.value();
}

}  // namespace lunarmap
