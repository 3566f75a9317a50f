#pragma once

#include <cstdint>

namespace tinfer {

/// Purpose tag for deriving independent random streams. Every consumer of
/// randomness in the library names its stream as (seed, trial, purpose), so
/// parallel Monte Carlo trials draw from provably disjoint sequences while
/// remaining reproducible from the single user-facing seed.
enum class StreamPurpose : std::uint64_t {
  kTruth = 1,       // ground-truth factors and core rotations
  kObservations = 2,  // sampling positions and noise draws
  kInit = 3,        // independent-initialization perturbations
  kForms = 4,       // linear-form supports
  kNoiseField = 5,  // heteroskedastic sd fields
  kGeneric = 6,
};

/// Counter-based 64-bit generator (SplitMix64 stream). The stream key is a
/// mix of (seed, trial, purpose); draws walk the Weyl sequence
/// state_k = key + k * 0x9E3779B97F4A7C15 through the SplitMix64 finalizer.
/// Output depends only on (seed, trial, purpose, draw index), never on
/// thread scheduling.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform on (0, 1]; safe under log().
  double uniform_open();
  /// Uniform integer in [0, n), unbiased via rejection.
  std::int64_t uniform_int(std::int64_t n);
  /// Standard normal (Box-Muller; consumes two uniforms).
  double gaussian();
  bool bernoulli(double p);
  /// Exponential with the given mean.
  double exponential(double mean);
  /// Poisson draw; exact for any mean (large means split into chunks).
  std::int64_t poisson(double mean);

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::uint64_t state_;
};

}  // namespace tinfer
