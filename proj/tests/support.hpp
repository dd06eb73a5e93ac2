#ifndef GWL_TESTS_SUPPORT_HPP
#define GWL_TESTS_SUPPORT_HPP

#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gwl/cli.hpp"
#include "gwl/config_space.hpp"
#include "gwl/dataset.hpp"
#include "gwl/energy_models.hpp"
#include "gwl/tiny_nn.hpp"

namespace gwl::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gwl-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gwl");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Central differences of the network logit on the one-hot relaxation.
inline SiteMatrix fd_input_grad(const Network& net, const Config& x, double h = 1e-5) {
  const SiteMatrix base = SiteMatrix::one_hot(net.space(), x);
  SiteMatrix out(base.sites(), base.values());
  Tape tape;
  for (std::size_t i = 0; i < base.sites(); ++i)
    for (int v = 0; v < base.values(); ++v) {
      SiteMatrix p = base, m = base;
      p(i, v) += h;
      m(i, v) -= h;
      out(i, v) = (forward(net, p, tape) - forward(net, m, tape)) / (2 * h);
    }
  return out;
}

// Largest relative error over entries whose magnitude exceeds floor.
inline double max_rel_error(const SiteMatrix& got, const SiteMatrix& want, double floor = 1e-6) {
  double worst = 0;
  for (std::size_t k = 0; k < want.data().size(); ++k) {
    const double w = want.data()[k];
    if (std::abs(w) <= floor) continue;
    worst = std::max(worst, std::abs(got.data()[k] - w) / std::abs(w));
  }
  return worst;
}

inline Config random_config(const ConfigSpace& space, Rng& rng) {
  Config x = Config::zeros(space);
  for (auto& v : x.values) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(space.values)));
  return x;
}

// 28x28 strokes: label 0 a ring, 1 a vertical bar, 2 a horizontal bar, with
// a little seeded noise. Labels cycle 0, 1, 2.
inline IdxImages synthetic_images(std::uint32_t count, std::uint64_t seed) {
  IdxImages out;
  out.count = count;
  out.rows = out.cols = 28;
  out.pixels.assign(std::size_t{count} * 784, 0);
  Rng rng(seed);
  for (std::uint32_t n = 0; n < count; ++n) {
    std::uint8_t* img = out.pixels.data() + std::size_t{n} * 784;
    const int shift = static_cast<int>(rng.below(3)) - 1;
    for (int y = 0; y < 28; ++y)
      for (int x = 0; x < 28; ++x) {
        const double dy = y - 13.5, dx = x - 13.5 - shift;
        bool on = false;
        switch (n % 3) {
          case 0: on = std::abs(std::hypot(dx, dy) - 7.0) < 2.0; break;
          case 1: on = std::abs(dx) < 2.0 && std::abs(dy) < 9.0; break;
          default: on = std::abs(dy) < 2.0 && std::abs(dx) < 9.0; break;
        }
        img[y * 28 + x] = static_cast<std::uint8_t>(on ? 200 + rng.below(56) : rng.below(20));
      }
  }
  return out;
}

inline IdxLabels synthetic_labels(std::uint32_t count) {
  IdxLabels out;
  out.count = count;
  for (std::uint32_t n = 0; n < count; ++n) out.labels.push_back(static_cast<std::uint8_t>(n % 3));
  return out;
}

}  // namespace gwl::test

#endif  // GWL_TESTS_SUPPORT_HPP
