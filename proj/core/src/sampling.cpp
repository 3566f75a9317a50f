#include "tinfer/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tinfer/errors.hpp"

namespace tinfer {

NoiseModel NoiseModel::gaussian(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("NoiseModel::gaussian: sigma must be >= 0");
  NoiseModel m;
  m.kind = Kind::kGaussian;
  m.sigma = sigma;
  return m;
}

NoiseModel NoiseModel::bernoulli() {
  NoiseModel m;
  m.kind = Kind::kBernoulli;
  return m;
}

NoiseModel NoiseModel::poisson() {
  NoiseModel m;
  m.kind = Kind::kPoisson;
  return m;
}

NoiseModel NoiseModel::exponential() {
  NoiseModel m;
  m.kind = Kind::kExponential;
  return m;
}

NoiseModel NoiseModel::custom_sd(DenseTensor sd) {
  NoiseModel m;
  m.kind = Kind::kCustomSd;
  m.sd = std::move(sd);
  return m;
}

void validate_noise(const NoiseModel& noise, const DenseTensor& truth) {
  switch (noise.kind) {
    case NoiseModel::Kind::kGaussian:
      if (noise.sigma < 0.0) throw std::invalid_argument("gaussian noise: sigma must be >= 0");
      return;
    case NoiseModel::Kind::kBernoulli:
      for (std::int64_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0.0 || truth[i] > 1.0) {
          throw std::invalid_argument("bernoulli noise requires entries in [0,1]; entry " +
                                      format_index_1based(truth.shape(), i) + " is " +
                                      std::to_string(truth[i]));
        }
      }
      return;
    case NoiseModel::Kind::kPoisson:
    case NoiseModel::Kind::kExponential:
      for (std::int64_t i = 0; i < truth.size(); ++i) {
        if (!(truth[i] > 0.0)) {
          throw std::invalid_argument("poisson/exponential noise requires positive entries; entry " +
                                      format_index_1based(truth.shape(), i) + " is " +
                                      std::to_string(truth[i]));
        }
      }
      return;
    case NoiseModel::Kind::kCustomSd: {
      if (!noise.sd.has_value()) throw std::invalid_argument("custom_sd noise: sd tensor missing");
      const DenseTensor& s = *noise.sd;
      if (!(s.shape() == truth.shape())) {
        throw std::invalid_argument("custom_sd noise: sd tensor shape mismatch");
      }
      for (std::int64_t i = 0; i < s.size(); ++i) {
        if (s[i] < 0.0) {
          throw std::invalid_argument("custom_sd noise requires nonnegative sd; entry " +
                                      format_index_1based(s.shape(), i) + " is " +
                                      std::to_string(s[i]));
        }
      }
      return;
    }
  }
}

DenseTensor sd_tensor(const DenseTensor& truth, const NoiseModel& noise) {
  validate_noise(noise, truth);
  DenseTensor s(truth.shape());
  switch (noise.kind) {
    case NoiseModel::Kind::kGaussian:
      for (std::int64_t i = 0; i < s.size(); ++i) s[i] = noise.sigma;
      break;
    case NoiseModel::Kind::kBernoulli:
      for (std::int64_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(truth[i] * (1.0 - truth[i]));
      break;
    case NoiseModel::Kind::kPoisson:
      for (std::int64_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(truth[i]);
      break;
    case NoiseModel::Kind::kExponential:
      for (std::int64_t i = 0; i < s.size(); ++i) s[i] = truth[i];
      break;
    case NoiseModel::Kind::kCustomSd:
      s = *noise.sd;
      break;
  }
  return s;
}

ObservationSet sample_observations(const DenseTensor& truth, std::int64_t n,
                                   const NoiseModel& noise, std::uint64_t seed,
                                   std::uint64_t trial) {
  if (n < 0) throw std::invalid_argument("sample_observations: n must be >= 0");
  validate_noise(noise, truth);

  Rng rng(seed, trial, StreamPurpose::kObservations);
  ObservationSet out;
  out.shape = truth.shape();
  out.samples.reserve(static_cast<std::size_t>(n));
  const std::int64_t cells = truth.shape().num_entries();

  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t cell = rng.uniform_int(cells);
    const double mean = truth[cell];
    double y = 0.0;
    switch (noise.kind) {
      case NoiseModel::Kind::kGaussian:
        y = noise.sigma == 0.0 ? mean : mean + noise.sigma * rng.gaussian();
        break;
      case NoiseModel::Kind::kBernoulli:
        y = rng.bernoulli(mean) ? 1.0 : 0.0;
        break;
      case NoiseModel::Kind::kPoisson:
        y = static_cast<double>(rng.poisson(mean));
        break;
      case NoiseModel::Kind::kExponential:
        y = rng.exponential(mean);
        break;
      case NoiseModel::Kind::kCustomSd: {
        const double s = (*noise.sd)[cell];
        y = s == 0.0 ? mean : mean + s * rng.gaussian();
        break;
      }
    }
    out.samples.push_back(Observation{cell, y});
  }
  return out;
}

namespace {

// Random orthogonal r x r matrix from the left singular basis of a Gaussian
// square matrix.
Matrix random_rotation(int r, Rng& rng) {
  if (r == 1) {
    Matrix m(1, 1);
    m(0, 0) = 1.0;
    return m;
  }
  Matrix g(r, r);
  for (double& v : g.data) v = rng.gaussian();
  return svd_top_r(g, r).u;
}

double min_unfolding_singular_value(const DenseTensor& core) {
  double lo = 0.0;
  for (int j = 0; j < core.shape().order(); ++j) {
    ThinSvd svd = thin_svd(unfold(core, j));
    const double s = svd.sigma[static_cast<std::size_t>(core.shape().dim(j) - 1)];
    if (j == 0 || s < lo) lo = s;
  }
  return lo;
}

}  // namespace

TuckerFactorization generate_ground_truth(const GroundTruthSpec& spec) {
  spec.rank.validate_for(spec.shape);
  if (!(spec.lambda_min > 0.0)) {
    throw std::invalid_argument("generate_ground_truth: lambda_min must be positive");
  }
  Rng rng(spec.seed, spec.trial, StreamPurpose::kTruth);

  TuckerFactorization f;
  const int m = spec.shape.order();
  f.factors.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    Matrix g(spec.shape.dim(j), spec.rank.rank(j));
    for (double& v : g.data) v = rng.gaussian();
    f.factors.push_back(svd_top_r(g, spec.rank.rank(j)).u);
  }

  bool equal_ranks = true;
  for (int j = 1; j < m; ++j) equal_ranks = equal_ranks && spec.rank.rank(j) == spec.rank.rank(0);

  std::vector<int> core_dims(spec.rank.ranks.begin(), spec.rank.ranks.end());
  DenseTensor core{Shape(core_dims)};
  if (equal_ranks) {
    // Superdiagonal spectrum ramp lambda*(1 + j/10), capped at kappa0, then
    // per-mode random rotations. Rotations keep the unfolding spectra.
    const int r = spec.rank.rank(0);
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < m; ++j) idx[static_cast<std::size_t>(j)] = i;
      const double ramp = std::min(1.0 + 0.1 * i, spec.kappa0);
      core.at(idx) = spec.lambda_min * ramp;
    }
    for (int j = 0; j < m; ++j) {
      core = marginal_multiply(core, j, random_rotation(spec.rank.rank(j), rng));
    }
  } else {
    // Unequal rank profiles: a Gaussian core is full multilinear rank almost
    // surely; the rescale below pins the smallest unfolding singular value.
    for (double& v : core.data()) v = rng.gaussian();
  }

  const double smin = min_unfolding_singular_value(core);
  if (!(smin > 0.0)) throw NumericError("generate_ground_truth: degenerate core");
  const double rescale = spec.lambda_min / smin;
  for (double& v : core.data()) v *= rescale;

  f.core = std::move(core);
  return f;
}

DenseTensor uniform_sd_field(const Shape& shape, double lo, double hi, std::uint64_t seed,
                             std::uint64_t trial) {
  if (lo < 0.0 || hi < lo) throw std::invalid_argument("uniform_sd_field: need 0 <= lo <= hi");
  Rng rng(seed, trial, StreamPurpose::kNoiseField);
  DenseTensor s(shape);
  for (double& v : s.data()) v = lo + (hi - lo) * rng.uniform();
  return s;
}

}  // namespace tinfer
