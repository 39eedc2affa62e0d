#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace heatsrc {

/// Purposes that get their own random stream, so that e.g. changing the
/// number of thinning uniforms never shifts the prior draws.
enum class StreamPurpose : std::uint64_t {
  kPrior = 1,
  kAccept = 2,
  kThinning = 3,
  kNoise = 4,
  kPointProcess = 5,
  kMarks = 6,
};

/// Seedable random stream with platform-independent variates.
///
/// std::mt19937_64 output is fixed by the standard, but the std::*_distribution
/// classes are not, so the variates are generated here to keep runs
/// replayable bit-for-bit across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Child stream derived from a root seed and a purpose tag.
  static Rng stream(std::uint64_t root_seed, StreamPurpose purpose);
  static Rng stream(std::uint64_t root_seed, std::uint64_t tag);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); never returns 0.
  double uniform_open();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::uint64_t poisson(double mean);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used for seed derivation and cache keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace heatsrc
