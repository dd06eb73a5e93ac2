#include "gwl/dos_histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwl/errors.hpp"

namespace gwl {

BinSpec BinSpec::make(double lo, double hi, double width) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(width))
    throw InvalidArgument("bin spec must be finite");
  if (!(lo < hi)) throw InvalidArgument("bin range empty");
  if (!(width > 0)) throw InvalidArgument("bin width must be positive");
  const double n = (hi - lo) / width;
  if (std::abs(n - std::round(n)) > 1e-9 || std::round(n) < 1)
    throw InvalidArgument("bin range is not a whole number of bins");
  return BinSpec{lo, hi, width};
}

std::size_t BinSpec::count() const {
  return static_cast<std::size_t>(std::llround((hi - lo) / width));
}

BinIndex bin_index(const BinSpec& spec, double z) {
  const double half = spec.width / 2;
  if (z < spec.lo - half) return {BinIndex::Kind::low, 0};
  if (z >= spec.hi - half) return {BinIndex::Kind::high, 0};
  // Halves round up, so bin b owns [center - w/2, center + w/2).
  auto b = static_cast<std::int64_t>(std::floor((z - spec.lo) / spec.width + 0.5));
  const auto n = static_cast<std::int64_t>(spec.count());
  // Guard the edges against rounding in the division.
  b = std::clamp<std::int64_t>(b, 0, n - 1);
  return {BinIndex::Kind::in_range, static_cast<std::size_t>(b)};
}

double ModificationSchedule::ln_f() const {
  return std::ldexp(ln_f0, -static_cast<int>(std::min<std::uint64_t>(iteration, 1000)));
}

DosHistogram::DosHistogram(const BinSpec& sp)
    : spec(sp), s(sp.count(), 0.0), h(sp.count(), 0), visited(sp.count(), false) {}

void DosHistogram::record_visit(const BinIndex& b, double ln_f) {
  switch (b.kind) {
    case BinIndex::Kind::low:
      ++overflow_low;
      return;
    case BinIndex::Kind::high:
      ++overflow_high;
      return;
    case BinIndex::Kind::in_range:
      break;
  }
  s[b.bin] += ln_f;
  ++h[b.bin];
  visited[b.bin] = true;
}

void DosHistogram::count_visit(const BinIndex& b) {
  if (b.kind == BinIndex::Kind::low) {
    ++overflow_low;
  } else if (b.kind == BinIndex::Kind::high) {
    ++overflow_high;
  } else {
    ++h[b.bin];
    visited[b.bin] = true;
  }
}

bool DosHistogram::is_flat() const {
  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t hi = 0;
  double total = 0;
  std::size_t n = 0;
  for (auto count : h) {
    if (count == 0) continue;
    lo = std::min(lo, count);
    hi = std::max(hi, count);
    total += static_cast<double>(count);
    ++n;
  }
  if (n == 0) return false;
  return static_cast<double>(hi - lo) < total / static_cast<double>(n);
}

std::size_t DosHistogram::visited_count() const {
  return static_cast<std::size_t>(std::count(visited.begin(), visited.end(), true));
}

std::size_t DosHistogram::current_visited_count() const {
  return static_cast<std::size_t>(std::count_if(h.begin(), h.end(), [](auto c) { return c > 0; }));
}

void advance_iteration(DosHistogram& hist, ModificationSchedule& sched) {
  std::fill(hist.h.begin(), hist.h.end(), 0);
  ++sched.iteration;
}

}  // namespace gwl
