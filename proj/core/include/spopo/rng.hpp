#pragma once

// Counter-based random numbers (Philox-4x32 with 10 rounds). Each
// trajectory owns an independent stream addressed by (seed, stream id);
// the draw content depends only on those and on the draw index, never on
// scheduling, which keeps ensembles reproducible under any thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace spopo {

// One keyed permutation of a 128-bit counter.
inline std::array<std::uint32_t, 4> philox4x32(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Sequential view of one stream. Every call consumes exactly one counter
// block: next_uniform() yields one double in [0, 1), next_gaussian_pair()
// two independent standard normals via Box-Muller.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t draws_consumed() const { return block_; }

  double next_uniform() {
    const auto words = next_block();
    return to_unit(join(words[0], words[1]));
  }

  std::pair<double, double> next_gaussian_pair() {
    const auto words = next_block();
    // u1 is shifted into (0, 1] so the logarithm stays finite.
    const double u1 =
        (static_cast<double>(join(words[0], words[1]) >> 11) + 1.0) * kScale;
    const double u2 = to_unit(join(words[2], words[3]));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static constexpr double kScale = 0x1.0p-53;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
    return static_cast<std::uint64_t>(hi) << 32 | lo;
  }
  static double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * kScale;
  }

  std::array<std::uint32_t, 4> next_block() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    ++block_;
    return philox4x32(ctr, key_);
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
};

}  // namespace spopo
