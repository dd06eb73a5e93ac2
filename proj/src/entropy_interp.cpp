#include "gwl/entropy_interp.hpp"

#include <algorithm>

namespace gwl {

InterpView::InterpView(std::span<const double> centers, std::span<const double> values)
    : centers_(centers), values_(values) {
  if (centers.size() != values.size())
    throw DegenerateView("interpolation view needs equal-length centers and values");
  if (centers.size() < 2) throw DegenerateView("interpolation view needs at least 2 bins");
  for (std::size_t i = 1; i < centers.size(); ++i)
    if (!(centers[i] > centers[i - 1])) throw DegenerateView("interpolation centers must be strictly ascending");
}

InterpSample InterpView::at(double z) const {
  const std::size_t n = centers_.size();
  // Segment k spans [centers[k], centers[k+1]).
  std::size_t k;
  if (z < centers_[0]) {
    k = 0;
  } else {
    auto it = std::upper_bound(centers_.begin(), centers_.end(), z);
    k = static_cast<std::size_t>(it - centers_.begin()) - 1;
    k = std::min(k, n - 2);
  }
  const double x0 = centers_[k];
  const double x1 = centers_[k + 1];
  const double slope = (values_[k + 1] - values_[k]) / (x1 - x0);
  // Exact at the knots: values[k] at x0, values[k+1] at x1.
  const double value = z == x1 ? values_[k + 1] : values_[k] + slope * (z - x0);
  return {value, slope};
}

std::vector<double> bin_centers(const BinSpec& spec) {
  std::vector<double> c(spec.count());
  for (std::size_t b = 0; b < c.size(); ++b) c[b] = spec.center(b);
  return c;
}

InterpSample interp_entropy(const InterpView& view, double z) { return view.at(z); }

}  // namespace gwl
