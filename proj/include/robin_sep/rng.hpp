#pragma once

#include <array>
#include <cstdint>

namespace robin_sep {

/// Philox4x64-10 counter-based generator. The 128-bit key is (seed, stream),
/// so every replica gets an independent stream that does not depend on the
/// order in which replicas are executed.
class CounterRng {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  /// The raw block function.
  static Block philox(Block counter, Key key);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Exponential with the given rate (> 0).
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t blocks_drawn() const { return counter_; }

 private:
  Key key_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
  int buffer_pos_ = 4;
};

/// Stream identifiers used to derive independent streams from one seed.
enum class StreamPurpose : std::uint64_t { initial_config = 0, dynamics = 1 };

inline std::uint64_t stream_id(std::uint64_t replica, StreamPurpose purpose) {
  return (replica << 8) | static_cast<std::uint64_t>(purpose);
}

}  // namespace robin_sep
