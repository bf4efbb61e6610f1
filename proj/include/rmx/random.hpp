#ifndef RMX_RANDOM_HPP_
#define RMX_RANDOM_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace rmx {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Pure function of (key, counter); no internal state.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Uniform in [0, 1) with 53 random bits.
inline double to_unit_open_right(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform in (0, 1] with 53 random bits; safe to take the logarithm of.
inline double to_unit_open_left(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// A substream of the library-wide random source.
///
/// Every output is a pure function of (master seed, substream index, counter),
/// so results replay bit-for-bit regardless of how work is scheduled. Random
/// access is available through block(); the sequential helpers advance the
/// counter by one block per call (normal_pair/fill_normal use both halves).
class RandomStream {
 public:
  struct Block {
    std::uint64_t lo;
    std::uint64_t hi;
  };

  constexpr RandomStream() = default;
  constexpr RandomStream(std::uint64_t master_seed, std::uint64_t substream,
                         std::uint64_t counter = 0)
      : seed_(master_seed), substream_(substream), counter_(counter) {}

  constexpr std::uint64_t master_seed() const { return seed_; }
  constexpr std::uint64_t substream_index() const { return substream_; }
  constexpr std::uint64_t counter() const { return counter_; }

  /// 128 random bits at an absolute counter position.
  Block block(std::uint64_t index) const {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(substream_),
        static_cast<std::uint32_t>(substream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32(ctr, key);
    return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
            (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
  }

  /// Independent child stream; the derivation is deterministic.
  RandomStream split(std::uint64_t child) const {
    return RandomStream(seed_, splitmix64(substream_ ^ splitmix64(child ^ 0x5851F42D4C957F2Dull)));
  }

  std::uint64_t next_u64() { return block(counter_++).lo; }
  double uniform() { return to_unit_open_right(next_u64()); }

  /// Two independent standard normals from one block (Box-Muller).
  std::array<double, 2> normal_pair() { return normal_pair_at(counter_++); }

  double normal() { return normal_pair()[0]; }

  void fill_normal(std::span<double> out) {
    std::size_t i = 0;
    for (; i + 1 < out.size(); i += 2) {
      const auto z = normal_pair();
      out[i] = z[0];
      out[i + 1] = z[1];
    }
    if (i < out.size()) out[i] = normal();
  }

  std::array<double, 2> normal_pair_at(std::uint64_t index) const {
    const Block b = block(index);
    const double r = std::sqrt(-2.0 * std::log(to_unit_open_left(b.lo)));
    const double theta = 2.0 * std::numbers::pi * to_unit_open_right(b.hi);
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t substream_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace rmx

#endif  // RMX_RANDOM_HPP_
