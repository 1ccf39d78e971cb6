#pragma once

#include <array>
#include <cstdint>

namespace cvqkd {

// Philox4x32-10 block function.  Counter-based: every 128-bit counter value
// maps to an independent 128-bit output block under a fixed 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        const std::array<std::uint32_t, 4>& counter);

// One reproducible random stream, addressed by (master_seed, stream_id).
// Streams with distinct ids occupy disjoint counter regions of the same
// keyed Philox instance and are therefore independent.  No global state,
// no wall-clock input anywhere.
class RngStream {
 public:
  static constexpr std::uint64_t kSubstreamStride = 16;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);
  RngStream(std::uint64_t master_seed, std::uint64_t trial_index, std::uint32_t substream);

  std::uint64_t next_u64();

  // Uniform on (0,1), 53-bit resolution, never exactly 0 or 1.
  double next_double();

  // Standard normal via Box-Muller; consumes uniforms in pairs and caches
  // the second variate, so draw k depends only on (seed, stream, k).
  double next_normal();

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int buf_pos_ = 2;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// SplitMix64 finalizer; used to derive stream keys from the master seed.
std::uint64_t mix64(std::uint64_t x);

}  // namespace cvqkd
