#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ddp {

/// One Philox4x32 block with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Counter-based Philox4x32-10 generator.
///
/// The stream is a pure function of (seed, stream id, draw index), so
/// identical call sequences give identical values on every platform.
/// Normal variates use Box-Muller on 53-bit uniforms rather than
/// std::normal_distribution, whose output is implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "philox4x32-10";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1]; safe to take the log of.
  double uniform_open0();
  /// Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();
  /// Normal(0, stddev) resampled until |x| < 2 * stddev.
  double truncated_normal(double stddev);

  /// Independent generator keyed by the same seed on a derived stream.
  Rng fork(std::uint64_t tag) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace ddp
