#pragma once

// Philox4x32-10 counter-based generator. A frame's random numbers depend only
// on (seed, frame index, draw index), so any split of frames across threads
// reproduces the same draws.

#include <array>
#include <cmath>
#include <cstdint>

namespace fblper {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Sequential uniforms for one frame. Counter words: frame index (64 bit),
/// block index, 0.
class FrameStream {
 public:
  FrameStream(std::uint64_t seed, std::uint64_t frame)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        frame_lo_(static_cast<std::uint32_t>(frame)),
        frame_hi_(static_cast<std::uint32_t>(frame >> 32)) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    if (used_ == 2) refill();
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(buf_[2 * used_]) << 32 | buf_[2 * used_ + 1]) >> 11;
    ++used_;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Exp(1), the normalized fading gain of a Rayleigh link.
  double exponential() { return -std::log(uniform()); }

 private:
  void refill() {
    buf_ = Philox4x32::block({frame_lo_, frame_hi_, block_++, 0u}, key_);
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t frame_lo_;
  std::uint32_t frame_hi_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter buf_{};
  int used_ = 2;
};

}  // namespace fblper
