#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "docpretext/common.hpp"

namespace docpretext {

// Counter-style splitmix64 generator. The whole state is one u64, which
// keeps generators value-semantic, cheap to split per sample index, and
// trivially serializable into checkpoints. All derived quantities
// (bounded ints, reals, normals) are produced by our own code so results
// are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Documented seed derivation: every subsystem draws its seed as
  // derive(root, "subsystem-tag"), so one root seed pins the whole run.
  static std::uint64_t derive(std::uint64_t root, std::string_view tag) {
    return mix(root ^ fnv1a64(tag));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). Debiased via 128-bit multiply rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw DomainError("Rng::below: bound must be positive");
    if (n == 1) return 0;
    while (true) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo < n) {
        std::uint64_t t = (0 - n) % n;
        if (lo < t) continue;
      }
      return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    double u1 = 0.0;
    do {
      u1 = real01();
    } while (u1 <= 0.0);
    double u2 = real01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Independent child stream for sample index (a, b); does not advance
  // this generator, so batch lanes can draw in parallel.
  Rng child(std::uint64_t a, std::uint64_t b = 0) const {
    return Rng(mix(mix(state_ ^ mix(a)) ^ mix(b ^ 0x5851f42d4c957f2dull)));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

}  // namespace docpretext
