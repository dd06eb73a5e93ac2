#include "gwl/random.hpp"

#include <cstdio>

#include "gwl/errors.hpp"

namespace gwl {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void Rng::reseed(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) word = splitmix64(x);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's nearly-divisionless bounded draw.
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::string Rng::to_hex() const {
  std::string out;
  out.reserve(64);
  char buf[17];
  for (auto word : s_) {
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(word));
    out += buf;
  }
  return out;
}

Rng Rng::from_hex(const std::string& hex) {
  if (hex.size() != 64) throw FormatError("rng state must be 64 hex digits, got " + std::to_string(hex.size()));
  State s{};
  for (std::size_t w = 0; w < 4; ++w) {
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < 16; ++k) {
      const char c = hex[w * 16 + k];
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
      else throw FormatError(std::string("bad hex digit in rng state: ") + c);
      word = (word << 4) | static_cast<std::uint64_t>(d);
    }
    s[w] = word;
  }
  if (s == State{}) throw FormatError("rng state is all zero");
  Rng rng;
  rng.set_state(s);
  return rng;
}

}  // namespace gwl
