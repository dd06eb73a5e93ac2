#include "gwl/energy_models.hpp"

#include <charconv>
#include <map>

#include "gwl/errors.hpp"

namespace gwl {

namespace {

std::size_t lattice_side(const ConfigSpace& space) {
  if (space.values != 2) throw ModelMismatch("Ising model needs binary sites (V = 2)");
  if (!space.has_grid() || *space.height != *space.width)
    throw ModelMismatch("Ising model needs a square lattice");
  return *space.height;
}

int spin(int v) { return 2 * v - 1; }

// Sum of the four neighbour spins with periodic wraparound. On a 2x2
// lattice the left and right neighbours coincide and are counted twice.
int neighbour_sum(const Config& x, std::size_t L, std::size_t r, std::size_t c) {
  const std::size_t up = (r + L - 1) % L, down = (r + 1) % L;
  const std::size_t left = (c + L - 1) % L, right = (c + 1) % L;
  return spin(x[up * L + c]) + spin(x[down * L + c]) + spin(x[r * L + left]) + spin(x[r * L + right]);
}

std::map<std::string, std::string> parse_params(const std::string& text, const std::string& model) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UnknownModel("unknown model '" + model + "': expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
    pos = end + 1;
  }
  return out;
}

template <typename T>
T param(const std::map<std::string, std::string>& params, const std::string& key, const std::string& model,
        std::optional<T> fallback = std::nullopt) {
  auto it = params.find(key);
  if (it == params.end()) {
    if (fallback) return *fallback;
    throw UnknownModel("unknown model '" + model + "': missing parameter " + key);
  }
  T value{};
  const char* first = it->second.data();
  const char* last = first + it->second.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw UnknownModel("unknown model '" + model + "': bad value for " + key + ": '" + it->second + "'");
  return value;
}

}  // namespace

double ising_energy(const ConfigSpace& space, const Config& x) {
  const std::size_t L = lattice_side(space);
  check_config(space, x);
  long e = 0;
  for (std::size_t r = 0; r < L; ++r)
    for (std::size_t c = 0; c < L; ++c) {
      const int s = spin(x[r * L + c]);
      e -= s * spin(x[r * L + (c + 1) % L]);
      e -= s * spin(x[((r + 1) % L) * L + c]);
    }
  return static_cast<double>(e);
}

SiteMatrix ising_grad_onehot(const ConfigSpace& space, const Config& x) {
  const std::size_t L = lattice_side(space);
  check_config(space, x);
  SiteMatrix g(space.sites, 2);
  for (std::size_t r = 0; r < L; ++r)
    for (std::size_t c = 0; c < L; ++c) {
      const double sum = neighbour_sum(x, L, r, c);
      g(r * L + c, 0) = sum;
      g(r * L + c, 1) = -sum;
    }
  return g;
}

IsingModel::IsingModel(std::size_t L)
    : L_(L), space_(ConfigSpace::grid(L, L, 2)), name_("ising:L=" + std::to_string(L)) {
  if (L < 2) throw ModelMismatch("Ising lattice side must be at least 2");
}

double IsingModel::energy(const Config& x) const { return ising_energy(space_, x); }

SiteMatrix IsingModel::grad_onehot(const Config& x) const { return ising_grad_onehot(space_, x); }

NetworkModel::NetworkModel(Network net, std::string name) : net_(std::move(net)), name_(std::move(name)) {}

double NetworkModel::energy(const Config& x) const {
  thread_local Tape tape;
  return forward(net_, x, tape);
}

SiteMatrix NetworkModel::grad_onehot(const Config& x) const {
  SiteMatrix g;
  energy_and_grad(x, g);
  return g;
}

double NetworkModel::energy_and_grad(const Config& x, SiteMatrix& grad) const {
  thread_local Tape tape;
  const double z = forward(net_, x, tape);
  grad = backward_input(net_, tape);
  return z;
}

ConstantModel::ConstantModel(ConfigSpace space, double value, std::string name)
    : space_(std::move(space)), value_(value), name_(std::move(name)) {}

double ConstantModel::energy(const Config& x) const {
  check_config(space_, x);
  return value_;
}

SiteMatrix ConstantModel::grad_onehot(const Config& x) const {
  check_config(space_, x);
  return SiteMatrix(space_.sites, space_.values);
}

std::unique_ptr<EnergyModel> make_model(const std::string& name) {
  const std::size_t colon = name.find(':');
  if (colon == std::string::npos) throw UnknownModel("unknown model '" + name + "'");
  const std::string kind = name.substr(0, colon);
  const std::string rest = name.substr(colon + 1);
  try {
    if (kind == "ising") {
      const auto params = parse_params(rest, name);
      auto model = std::make_unique<IsingModel>(param<std::size_t>(params, "L", name));
      return model;
    }
    if (kind == "nn") {
      if (rest.empty()) throw UnknownModel("unknown model '" + name + "': missing weight file");
      return std::make_unique<NetworkModel>(load_weights(rest), name);
    }
    if (kind == "tinycnn") {
      const auto params = parse_params(rest, name);
      const auto h = param<std::size_t>(params, "H", name);
      const auto w = param<std::size_t>(params, "W", name);
      const int v = param<int>(params, "V", name, 2);
      const auto seed = param<std::uint64_t>(params, "seed", name, 0);
      const double scale = param<double>(params, "scale", name, 1.0);
      const double bias = param<double>(params, "bias", name, 0.0);
      return std::make_unique<NetworkModel>(seeded_tiny_cnn(ConfigSpace::grid(h, w, v), seed, scale, bias), name);
    }
    if (kind == "const") {
      const auto params = parse_params(rest, name);
      const auto d = param<std::size_t>(params, "D", name);
      const int v = param<int>(params, "V", name, 2);
      const double value = param<double>(params, "value", name, 0.0);
      return std::make_unique<ConstantModel>(ConfigSpace::flat(d, v), value, name);
    }
  } catch (const InvalidArgument& e) {
    throw UnknownModel("unknown model '" + name + "': " + e.what());
  } catch (const ModelMismatch& e) {
    throw UnknownModel("unknown model '" + name + "': " + e.what());
  }
  throw UnknownModel("unknown model '" + name + "'");
}

}  // namespace gwl
