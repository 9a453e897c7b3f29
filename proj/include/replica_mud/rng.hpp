#pragma once

#include <array>
#include <cstdint>

namespace rmud {

/// Philox4x32-10 block function.  Pure: output depends
/// only on (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Stream identifiers.  A stream is addressed by (seed, tag, a, b); the
/// remaining counter word walks through the stream, so any two distinct
/// addresses give non-overlapping sequences of up to 2^32 blocks.
enum class StreamTag : std::uint32_t {
  kInstance = 1,  // a = instance index
  kBits = 2,      // a = instance index, b = symbol index
  kNoise = 3,     // a = instance index, b = symbol index
  kUser = 4,      // free for callers (e.g. simulate_symbol's noise_seed)
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamTag tag, std::uint32_t a = 0,
            std::uint32_t b = 0);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();
  /// +1 or -1 with equal probability.
  int sign();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rmud
