#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dualquant {

/// Counter-based random stream (Philox4x32-10) keyed by (seed, stream_id).
///
/// The 128-bit Philox counter is split into a 64-bit block index and the
/// 64-bit stream id, and the 64-bit seed is the key. Two streams with equal
/// (seed, stream_id) produce identical sequences; distinct stream ids give
/// independent sequences, which is how Monte Carlo shards stay reproducible
/// regardless of how many threads evaluate them.
///
/// Models UniformRandomBitGenerator so it can drive std::shuffle and friends,
/// but all library samplers use the explicit transforms below.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// A fresh stream with the same seed and a stream id derived from (stream_id, index).
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1]; safe as an argument to log() and negative powers.
  double uniform_open_left() { return 1.0 - uniform(); }

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int cursor_ = 4;
};

/// SplitMix64 finalizer; used to derive stream ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace dualquant
