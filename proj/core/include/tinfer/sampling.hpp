#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tinfer/rng.hpp"
#include "tinfer/tensor.hpp"
#include "tinfer/tucker.hpp"

namespace tinfer {

/// One trace-regression sample: the sampled cell (canonical offset) and the
/// observed value y.
struct Observation {
  std::int64_t offset = 0;
  double y = 0.0;
};

/// Samples drawn i.i.d. uniformly over the cells, with replacement.
struct ObservationSet {
  Shape shape;
  std::vector<Observation> samples;

  std::int64_t count() const { return static_cast<std::int64_t>(samples.size()); }
};

/// Conditional law of an observation given its cell. Every model satisfies
/// E[y | cell w] = T_w; the entrywise sd tensor is given by sd_tensor().
struct NoiseModel {
  enum class Kind { kGaussian, kBernoulli, kPoisson, kExponential, kCustomSd };

  Kind kind = Kind::kGaussian;
  double sigma = 1.0;              // gaussian only; sigma >= 0, 0 = noiseless
  std::optional<DenseTensor> sd;   // custom_sd only, entries >= 0

  static NoiseModel gaussian(double sigma);
  static NoiseModel bernoulli();
  static NoiseModel poisson();
  static NoiseModel exponential();
  static NoiseModel custom_sd(DenseTensor sd);
};

/// Eagerly checks the model preconditions over every entry of the truth;
/// reports the first offending 1-based index.
void validate_noise(const NoiseModel& noise, const DenseTensor& truth);

/// Entrywise conditional standard deviation tensor S.
DenseTensor sd_tensor(const DenseTensor& truth, const NoiseModel& noise);

ObservationSet sample_observations(const DenseTensor& truth, std::int64_t n,
                                   const NoiseModel& noise, std::uint64_t seed,
                                   std::uint64_t trial = 0);

/// Incoherent random ground truth: factors are left singular subspaces of
/// d_j x r_j standard Gaussian matrices; the core fixes the smallest
/// unfolding singular value at lambda_min.
struct GroundTruthSpec {
  Shape shape;
  MultilinearRank rank;
  double lambda_min = 1.0;
  double kappa0 = 10.0;  // cap on the superdiagonal spectrum ramp
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};
TuckerFactorization generate_ground_truth(const GroundTruthSpec& spec);

/// Seeded uniform sd field with entries in [lo, hi].
DenseTensor uniform_sd_field(const Shape& shape, double lo, double hi, std::uint64_t seed,
                             std::uint64_t trial = 0);

}  // namespace tinfer
