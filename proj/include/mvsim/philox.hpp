#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mvsim {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11). Stateless:
/// the output is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Uniform double in the open interval (0, 1) from 64 random bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals from one Philox block (Box-Muller).
inline std::array<double, 2> normal_pair(const Philox4x32::Counter& ctr,
                                         const Philox4x32::Key& key) noexcept {
  const auto r = Philox4x32::apply(ctr, key);
  const double u1 = to_open_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
  const double u2 = to_open_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Stream tags; the tag occupies the high 16 bits of counter word 3 so the
/// purposes below never share counter values.
enum class StreamTag : std::uint32_t {
  kBrownian = 0,
  kInitial = 1,
  kConvolution = 2,
  kProjection = 3,
  kPairSampling = 4,
};

inline Philox4x32::Key key_from_seed(std::uint64_t seed) noexcept {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Counter for logical coordinates (block, particle, replication, tag, lane).
/// `block` is the step-pair index for Brownian streams.
inline Philox4x32::Counter stream_counter(std::uint32_t block, std::uint32_t particle,
                                          std::uint32_t replication, StreamTag tag,
                                          std::uint32_t lane) noexcept {
  return {block, particle, replication, (static_cast<std::uint32_t>(tag) << 16) | (lane & 0xFFFFu)};
}

}  // namespace mvsim
