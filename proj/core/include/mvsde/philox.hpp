#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace mvsde::rng {

/// Philox4x32-10 block function. Stateless: each 128-bit counter and 64-bit
/// key pair maps to four independent 32-bit words, so draws indexed by
/// (particle, step, block) are reproducible under any thread partitioning.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

inline double to_unit_interval(std::uint32_t x) {
  return (static_cast<double>(x) + 0.5) * 0x1.0p-32;  // in (0, 1)
}

/// Streams keep initial-condition draws, simulation noise and auxiliary
/// uniforms on disjoint counters.
enum class Stream : std::uint32_t { init = 0, noise = 1, aux = 2 };

inline std::array<std::uint32_t, 4> make_counter(Stream stream, std::uint64_t particle,
                                                 std::uint64_t step, std::uint32_t block) {
  return {static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32),
          static_cast<std::uint32_t>(step),
          (static_cast<std::uint32_t>(stream) << 28) | block};
}

inline std::array<std::uint32_t, 2> make_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Standard normals for (seed, stream, particle, step) via Box-Muller on
/// consecutive Philox blocks; four normals per block.
inline void fill_normals(std::uint64_t seed, Stream stream, std::uint64_t particle,
                         std::uint64_t step, std::span<double> out) {
  const auto key = make_key(seed);
  std::size_t written = 0;
  for (std::uint32_t block = 0; written < out.size(); ++block) {
    const auto words = philox4x32(make_counter(stream, particle, step, block), key);
    for (int pair = 0; pair < 2 && written < out.size(); ++pair) {
      const double u1 = to_unit_interval(words[2 * pair]);
      const double u2 = to_unit_interval(words[2 * pair + 1]);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[written++] = radius * std::cos(angle);
      if (written < out.size()) out[written++] = radius * std::sin(angle);
    }
  }
}

/// One uniform draw in (0, 1) for (seed, stream, particle, step).
inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t particle,
                      std::uint64_t step) {
  const auto words = philox4x32(make_counter(stream, particle, step, 0), make_key(seed));
  return to_unit_interval(words[0]);
}

}  // namespace mvsde::rng
