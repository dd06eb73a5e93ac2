#include "gwl/config_space.hpp"

#include <string>

#include "gwl/errors.hpp"

namespace gwl {

ConfigSpace ConfigSpace::flat(std::size_t sites, int values) {
  if (sites < 1) throw InvalidArgument("config space needs at least one site");
  if (values < 2) throw InvalidArgument("config space needs at least two values per site");
  return ConfigSpace{sites, values, std::nullopt, std::nullopt};
}

ConfigSpace ConfigSpace::grid(std::size_t height, std::size_t width, int values) {
  ConfigSpace s = flat(height * width, values);
  s.height = height;
  s.width = width;
  return s;
}

void check_config(const ConfigSpace& space, const Config& x) {
  if (x.size() != space.sites)
    throw DimensionMismatch("config has " + std::to_string(x.size()) + " sites, space has " +
                            std::to_string(space.sites));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < 0 || x[i] >= space.values)
      throw DimensionMismatch("site " + std::to_string(i) + " value " + std::to_string(x[i]) + " outside [0, " +
                              std::to_string(space.values) + ")");
}

SiteMatrix SiteMatrix::one_hot(const ConfigSpace& space, const Config& x) {
  SiteMatrix m(space.sites, space.values);
  for (std::size_t i = 0; i < space.sites; ++i) m(i, x[i]) = 1.0;
  return m;
}

}  // namespace gwl
