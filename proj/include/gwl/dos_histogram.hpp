#ifndef GWL_DOS_HISTOGRAM_HPP
#define GWL_DOS_HISTOGRAM_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gwl {

// Uniform binning of the output axis. Bin b is centred on lo + b * width and
// covers [center - width/2, center + width/2), so for width 1 and integer lo
// the bin of z is round(z) - lo.
struct BinSpec {
  double lo = -300.0;
  double hi = 100.0;
  double width = 1.0;

  // Validating constructor; throws InvalidArgument("bin range empty") when
  // lo >= hi and on a non-integral bin count.
  static BinSpec make(double lo, double hi, double width);

  std::size_t count() const;
  double center(std::size_t b) const { return lo + static_cast<double>(b) * width; }

  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

struct BinIndex {
  enum class Kind { in_range, low, high };

  Kind kind = Kind::in_range;
  std::size_t bin = 0;

  bool in_range() const { return kind == Kind::in_range; }

  friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

BinIndex bin_index(const BinSpec& spec, double z);

// ln f_m = ln_f0 / 2^iteration
struct ModificationSchedule {
  double ln_f0 = 1.0;
  std::uint64_t iteration = 0;

  double ln_f() const;
};

// Entropy estimate S and visit histogram H over a fixed bin window.
struct DosHistogram {
  BinSpec spec;
  std::vector<double> s;
  std::vector<std::uint64_t> h;
  std::vector<bool> visited;  // ever visited since the sampler started
  std::uint64_t overflow_low = 0;
  std::uint64_t overflow_high = 0;

  DosHistogram() = default;
  explicit DosHistogram(const BinSpec& spec);

  std::size_t size() const { return s.size(); }

  // Adds ln_f to s[b] and one to h[b]; out-of-range markers only bump the
  // matching overflow counter.
  void record_visit(const BinIndex& b, double ln_f);

  // Counts a visit in h without touching s. Used for chains run against a
  // frozen entropy estimate.
  void count_visit(const BinIndex& b);

  // max(h) - min(h) < mean(h) over bins with h > 0; false when none.
  bool is_flat() const;

  std::size_t visited_count() const;
  std::size_t current_visited_count() const;
};

// Zeroes h and halves ln_f; s and visited are preserved.
void advance_iteration(DosHistogram& hist, ModificationSchedule& sched);

}  // namespace gwl

#endif  // GWL_DOS_HISTOGRAM_HPP
