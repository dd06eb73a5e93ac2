#ifndef GWL_RANDOM_HPP
#define GWL_RANDOM_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <string>

namespace gwl {

// xoshiro256** with splitmix64 seeding. The std distributions are
// implementation-defined, so the samplers draw through the helpers below
// to keep seeded runs identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  const State& state() const noexcept { return s_; }
  void set_state(const State& s) noexcept { s_ = s; }

  // 64 lowercase hex digits, word 0 first.
  std::string to_hex() const;
  static Rng from_hex(const std::string& hex);

  friend bool operator==(const Rng& a, const Rng& b) { return a.s_ == b.s_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  State s_{};
};

}  // namespace gwl

#endif  // GWL_RANDOM_HPP
