#ifndef GWL_CONFIG_SPACE_HPP
#define GWL_CONFIG_SPACE_HPP

#include <cstddef>
#include <optional>
#include <vector>

namespace gwl {

// {0..values-1}^sites, optionally laid out as a height x width grid.
struct ConfigSpace {
  std::size_t sites = 1;
  int values = 2;
  std::optional<std::size_t> height;
  std::optional<std::size_t> width;

  static ConfigSpace flat(std::size_t sites, int values);
  static ConfigSpace grid(std::size_t height, std::size_t width, int values);

  bool has_grid() const { return height.has_value(); }

  friend bool operator==(const ConfigSpace&, const ConfigSpace&) = default;
};

struct Config {
  std::vector<int> values;

  Config() = default;
  explicit Config(std::vector<int> v) : values(std::move(v)) {}
  static Config zeros(const ConfigSpace& space) { return Config(std::vector<int>(space.sites, 0)); }

  std::size_t size() const { return values.size(); }
  int operator[](std::size_t i) const { return values[i]; }
  int& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const Config&, const Config&) = default;
};

// Throws DimensionMismatch if x does not lie in the space.
void check_config(const ConfigSpace& space, const Config& x);

// Row-major sites x values matrix; holds one-hot encodings and their
// gradients.
class SiteMatrix {
 public:
  SiteMatrix() = default;
  SiteMatrix(std::size_t sites, int values, double fill = 0.0)
      : sites_(sites), values_(values), data_(sites * static_cast<std::size_t>(values), fill) {}

  static SiteMatrix one_hot(const ConfigSpace& space, const Config& x);

  std::size_t sites() const { return sites_; }
  int values() const { return values_; }

  double& operator()(std::size_t i, int v) { return data_[i * static_cast<std::size_t>(values_) + static_cast<std::size_t>(v)]; }
  double operator()(std::size_t i, int v) const { return data_[i * static_cast<std::size_t>(values_) + static_cast<std::size_t>(v)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  SiteMatrix& operator*=(double k) {
    for (auto& d : data_) d *= k;
    return *this;
  }

  friend bool operator==(const SiteMatrix&, const SiteMatrix&) = default;

 private:
  std::size_t sites_ = 0;
  int values_ = 0;
  std::vector<double> data_;
};

}  // namespace gwl

#endif  // GWL_CONFIG_SPACE_HPP
