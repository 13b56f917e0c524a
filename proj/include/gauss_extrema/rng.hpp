#pragma once

// Counter-based random streams.
//
// Philox4x64-10 is the block function: a keyed bijection on 256-bit
// counters. A stream is the pair (key, counter position), so streams are
// plain values that can be copied, stored and replayed. Normal variates use
// Box-Muller on consecutive uniforms.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gauss_extrema {

namespace philox_detail {

inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

__extension__ using uint128 = unsigned __int128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const uint128 product = static_cast<uint128>(a) * b;
  hi = static_cast<std::uint64_t>(product >> 64);
  lo = static_cast<std::uint64_t>(product);
}

}  // namespace philox_detail

using PhiloxBlock = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

inline PhiloxBlock philox4x64_10(PhiloxBlock ctr, PhiloxKey key) {
  using namespace philox_detail;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class RngStream {
 public:
  // Counter words 1..2 address the substream, word 0 walks through it.
  RngStream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0)
      : key_{seed, tag}, stream_{index, 0} {}

  std::uint64_t next_u64() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double next_uniform_open0() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform_open0();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Independent child stream; deterministic in (this stream's identity, child).
  RngStream substream(std::uint64_t child) const {
    RngStream s(key_[0], stream_[0], splitmix64(key_[1] ^ splitmix64(child + 1)));
    s.stream_[1] = stream_[1];
    return s;
  }

  std::uint64_t blocks_consumed() const noexcept { return counter_; }

 private:
  void refill() {
    block_ = philox4x64_10({counter_, stream_[0], stream_[1], 0}, key_);
    ++counter_;
    pos_ = 0;
  }

  PhiloxKey key_;
  std::array<std::uint64_t, 2> stream_;
  std::uint64_t counter_ = 0;
  PhiloxBlock block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream for one Monte Carlo trial of an experiment with a given master seed.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  return RngStream(master_seed, trial_index);
}

}  // namespace gauss_extrema
