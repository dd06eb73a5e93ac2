#ifndef GWL_ORACLE_HPP
#define GWL_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwl/dos_histogram.hpp"
#include "gwl/energy_models.hpp"
#include "gwl/errors.hpp"

namespace gwl {

class SpecMismatch : public Error {
 public:
  using Error::Error;
};

// Exact state counts per bin. Counts are 64-bit: enumeration is capped by a
// budget far below 2^64 so they can never overflow.
struct ExactDos {
  BinSpec spec;
  std::vector<std::uint64_t> counts;
  std::uint64_t overflow_low = 0;
  std::uint64_t overflow_high = 0;
  std::uint64_t total = 0;  // V^D
};

inline constexpr std::uint64_t kDefaultEnumerationBudget = std::uint64_t{1} << 26;

struct EnumerateOptions {
  std::uint64_t budget = kDefaultEnumerationBudget;
  unsigned threads = 1;
  // Odometer order, most significant site first. Empty means 0..D-1.
  std::vector<std::size_t> site_order;
};

// V^D, or nullopt if it does not fit in 64 bits.
std::optional<std::uint64_t> state_count(const ConfigSpace& space);

// Human-readable V^D, e.g. "2^36 = 68719476736 states".
std::string describe_state_count(const ConfigSpace& space);

// Visits every config once and bins its energy. Throws BudgetExceeded when
// V^D exceeds the budget.
ExactDos enumerate_dos(const EnergyModel& model, const BinSpec& spec, const EnumerateOptions& opts = {});

// The exact counts in histogram form: s = ln(count), h = count,
// visited = count > 0.
DosHistogram exact_as_histogram(const ExactDos& exact);

// Entropy over a bin grid with a presence mask; the common currency of the
// comparison functions and the CSV files.
struct EntropyTable {
  BinSpec spec;
  std::vector<double> s;
  std::vector<bool> present;
  std::vector<std::uint64_t> counts;  // h column; exact counts for references

  static EntropyTable from_histogram(const DosHistogram& hist);
  static EntropyTable from_exact(const ExactDos& exact);
};

struct CoverageDefect {
  std::size_t bin = 0;
  double center = 0;
  bool in_reference = false;  // true: reference has it, estimate missed it
  std::uint64_t reference_count = 0;
};

struct HistogramError {
  double mean_abs = 0;
  double max_abs = 0;
  double offset = 0;  // added to the estimate; median of (ref - est)
  double max_aligned_mean_abs = 0;
  double max_aligned_max_abs = 0;
  double max_aligned_offset = 0;  // max(ref) - max(est)
  std::size_t shared_bins = 0;
  std::vector<CoverageDefect> defects;

  // Defects on bins whose reference count is at least min_count.
  std::size_t missed_bins(std::uint64_t min_count) const;
};

// Compares over bins present on both sides after aligning the estimate by
// an additive offset. Bins present on one side only are returned as
// coverage defects. Throws SpecMismatch on different bin grids.
HistogramError compare_entropy(const EntropyTable& reference, const EntropyTable& estimate);

HistogramError histogram_error(const ExactDos& exact, const DosHistogram& est);

}  // namespace gwl

#endif  // GWL_ORACLE_HPP
