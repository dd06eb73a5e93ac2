#include "gwl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace gwl {

namespace {

bool same_grid(const BinSpec& a, const BinSpec& b) {
  if (a.count() != b.count()) return false;
  const double tol = 1e-9 * std::max(1.0, std::abs(a.width));
  return std::abs(a.lo - b.lo) <= tol && std::abs(a.width - b.width) <= tol;
}

void enumerate_range(const EnergyModel& model, const BinSpec& spec, const std::vector<std::size_t>& order,
                     std::uint64_t first, std::uint64_t last, ExactDos& out) {
  const ConfigSpace& space = model.space();
  const auto V = static_cast<std::uint64_t>(space.values);
  Config x = Config::zeros(space);
  // Decode `first` with the last site in `order` as the fastest digit.
  std::uint64_t rest = first;
  for (std::size_t k = order.size(); k-- > 0;) {
    x[order[k]] = static_cast<int>(rest % V);
    rest /= V;
  }
  for (std::uint64_t n = first; n < last; ++n) {
    const BinIndex b = bin_index(spec, model.energy(x));
    if (b.kind == BinIndex::Kind::low)
      ++out.overflow_low;
    else if (b.kind == BinIndex::Kind::high)
      ++out.overflow_high;
    else
      ++out.counts[b.bin];
    for (std::size_t k = order.size(); k-- > 0;) {
      int& digit = x[order[k]];
      if (++digit < space.values) break;
      digit = 0;
    }
  }
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

std::optional<std::uint64_t> state_count(const ConfigSpace& space) {
  std::uint64_t n = 1;
  const auto V = static_cast<std::uint64_t>(space.values);
  for (std::size_t i = 0; i < space.sites; ++i) {
    if (n > UINT64_MAX / V) return std::nullopt;
    n *= V;
  }
  return n;
}

std::string describe_state_count(const ConfigSpace& space) {
  std::string out = std::to_string(space.values) + "^" + std::to_string(space.sites);
  if (auto n = state_count(space)) out += " = " + std::to_string(*n);
  return out + " states";
}

ExactDos enumerate_dos(const EnergyModel& model, const BinSpec& spec, const EnumerateOptions& opts) {
  const ConfigSpace& space = model.space();
  const auto total = state_count(space);
  if (!total || *total > opts.budget)
    throw BudgetExceeded("enumeration needs " + describe_state_count(space) + ", budget is " +
                             std::to_string(opts.budget),
                         describe_state_count(space));

  std::vector<std::size_t> order = opts.site_order;
  if (order.empty()) {
    order.resize(space.sites);
    std::iota(order.begin(), order.end(), 0);
  }
  {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> ident(space.sites);
    std::iota(ident.begin(), ident.end(), 0);
    if (sorted != ident) throw InvalidArgument("site order must be a permutation of the sites");
  }

  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(std::min<std::uint64_t>(*total, 1024))));
  std::vector<ExactDos> parts(threads);
  for (auto& p : parts) {
    p.spec = spec;
    p.counts.assign(spec.count(), 0);
  }
  auto bounds = [&](unsigned t) { return *total / threads * t + std::min<std::uint64_t>(t, *total % threads); };
  if (threads == 1) {
    enumerate_range(model, spec, order, 0, *total, parts[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] { enumerate_range(model, spec, order, bounds(t), bounds(t + 1), parts[t]); });
    for (auto& th : pool) th.join();
  }

  ExactDos out;
  out.spec = spec;
  out.counts.assign(spec.count(), 0);
  out.total = *total;
  for (const auto& p : parts) {
    for (std::size_t b = 0; b < out.counts.size(); ++b) out.counts[b] += p.counts[b];
    out.overflow_low += p.overflow_low;
    out.overflow_high += p.overflow_high;
  }
  return out;
}

DosHistogram exact_as_histogram(const ExactDos& exact) {
  DosHistogram hist(exact.spec);
  for (std::size_t b = 0; b < hist.size(); ++b) {
    if (exact.counts[b] == 0) continue;
    hist.s[b] = std::log(static_cast<double>(exact.counts[b]));
    hist.h[b] = exact.counts[b];
    hist.visited[b] = true;
  }
  hist.overflow_low = exact.overflow_low;
  hist.overflow_high = exact.overflow_high;
  return hist;
}

EntropyTable EntropyTable::from_histogram(const DosHistogram& hist) {
  return EntropyTable{hist.spec, hist.s, hist.visited, hist.h};
}

EntropyTable EntropyTable::from_exact(const ExactDos& exact) {
  return from_histogram(exact_as_histogram(exact));
}

std::size_t HistogramError::missed_bins(std::uint64_t min_count) const {
  return static_cast<std::size_t>(std::count_if(defects.begin(), defects.end(), [&](const CoverageDefect& d) {
    return d.in_reference && d.reference_count >= min_count;
  }));
}

HistogramError compare_entropy(const EntropyTable& reference, const EntropyTable& estimate) {
  if (!same_grid(reference.spec, estimate.spec)) throw SpecMismatch("histograms use different bin grids");
  const std::size_t n = reference.spec.count();
  if (reference.s.size() != n || estimate.s.size() != n || reference.present.size() != n ||
      estimate.present.size() != n)
    throw SpecMismatch("histogram length does not match its bin grid");

  HistogramError err;
  std::vector<std::size_t> shared;
  for (std::size_t b = 0; b < n; ++b) {
    const bool r = reference.present[b], e = estimate.present[b];
    if (r && e) {
      shared.push_back(b);
    } else if (r != e) {
      const std::uint64_t count = b < reference.counts.size() ? reference.counts[b] : 0;
      err.defects.push_back({b, reference.spec.center(b), r, r ? count : 0});
    }
  }
  err.shared_bins = shared.size();
  if (shared.empty()) return err;

  std::vector<double> diff;
  double ref_max = -INFINITY, est_max = -INFINITY;
  for (auto b : shared) {
    diff.push_back(reference.s[b] - estimate.s[b]);
    ref_max = std::max(ref_max, reference.s[b]);
    est_max = std::max(est_max, estimate.s[b]);
  }
  err.offset = median(diff);
  err.max_aligned_offset = ref_max - est_max;
  double sum = 0, sum_max = 0;
  for (double d : diff) {
    const double a = std::abs(d - err.offset);
    const double m = std::abs(d - err.max_aligned_offset);
    sum += a;
    sum_max += m;
    err.max_abs = std::max(err.max_abs, a);
    err.max_aligned_max_abs = std::max(err.max_aligned_max_abs, m);
  }
  err.mean_abs = sum / static_cast<double>(diff.size());
  err.max_aligned_mean_abs = sum_max / static_cast<double>(diff.size());
  return err;
}

HistogramError histogram_error(const ExactDos& exact, const DosHistogram& est) {
  return compare_entropy(EntropyTable::from_exact(exact), EntropyTable::from_histogram(est));
}

}  // namespace gwl
