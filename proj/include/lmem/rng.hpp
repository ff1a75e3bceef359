#pragma once

// Counter-based generation: every draw is a pure function of (seed, stream,
// counter), so any time index or replication can be produced in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace lmem::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
  }
};

/// A keyed stream addressed by two 64-bit coordinates.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ull));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  Philox4x32::Counter block(std::uint64_t a, std::uint64_t b) const {
    return Philox4x32::generate({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                                 static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                                key_);
  }

  /// Two uniforms on the open interval (0, 1) with 52-bit resolution.
  std::array<double, 2> uniforms(std::uint64_t a, std::uint64_t b) const {
    const auto w = block(a, b);
    return {to_open_unit(w[0], w[1]), to_open_unit(w[2], w[3])};
  }

  /// Two independent standard normals (Box-Muller).
  std::array<double, 2> normals(std::uint64_t a, std::uint64_t b) const {
    const auto u = uniforms(a, b);
    const double r = std::sqrt(-2 * std::log(u[0]));
    const double th = 2 * std::numbers::pi * u[1];
    return {r * std::cos(th), r * std::sin(th)};
  }

  static double to_open_unit(std::uint32_t lo, std::uint32_t hi) {
    // 52 bits keep (x + 1/2) / 2^52 exactly representable, so 1 is never reached
    const std::uint64_t x = ((std::uint64_t{hi} << 32) | lo) >> 12;
    return (double(x) + 0.5) * 0x1.0p-52;
  }

 private:
  Philox4x32::Key key_{};
};

}  // namespace lmem::rng
