#ifndef GWL_ENTROPY_INTERP_HPP
#define GWL_ENTROPY_INTERP_HPP

#include <span>
#include <vector>

#include "gwl/dos_histogram.hpp"
#include "gwl/errors.hpp"

namespace gwl {

class DegenerateView : public Error {
 public:
  using Error::Error;
};

struct InterpSample {
  double value = 0;
  double slope = 0;
};

// Piecewise-linear view of a binned entropy estimate. Non-owning: the
// centre and value spans must outlive the view.
class InterpView {
 public:
  InterpView(std::span<const double> centers, std::span<const double> values);

  // Linear blend on the containing segment; outside the knots the first or
  // last segment is extended. Exactly on an interior knot the slope is that
  // of the segment to the right.
  InterpSample at(double z) const;

  std::span<const double> centers() const { return centers_; }
  std::span<const double> values() const { return values_; }

 private:
  std::span<const double> centers_;
  std::span<const double> values_;
};

std::vector<double> bin_centers(const BinSpec& spec);

InterpSample interp_entropy(const InterpView& view, double z);

}  // namespace gwl

#endif  // GWL_ENTROPY_INTERP_HPP
