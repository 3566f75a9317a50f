#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tinfer/inference.hpp"
#include "tinfer/sampling.hpp"
#include "tinfer/tensor.hpp"
#include "tinfer/tucker.hpp"

namespace tinfer {

struct NoiseSpec {
  enum class Kind { kGaussian, kHeteroUniform, kPoisson, kExponential, kBernoulli };
  Kind kind = Kind::kGaussian;
  double sigma = 1.0;      // gaussian
  double lo = 0.75;        // hetero_uniform field bounds
  double hi = 1.25;

  /// Scale used where a single noise level is needed (init targets,
  /// regime thresholds): sigma for gaussian, hi for hetero_uniform, else 1.
  double nominal_scale() const;
};

struct FormsSpec {
  enum class Type { kSparse01, kCoverageFamily };
  Type type = Type::kSparse01;
  int support = 2;    // sparse01: number of distinct 0/1 entries
  int count = 100;    // coverage family size |Q|
  bool fixed_across_trials = true;
};

struct ExperimentConfig {
  Shape shape;
  MultilinearRank rank;
  /// Smallest unfolding singular value of the truth: lambda_coeff * dmax^gamma,
  /// unless lambda_min is set explicitly.
  double lambda_coeff = 10.0;
  double gamma = 0.5;
  std::optional<double> lambda_min;
  double kappa0 = 10.0;

  NoiseSpec noise;
  std::optional<double> sampling_rate;  // p = n/d*
  std::optional<std::int64_t> n;        // exactly one of p, n

  enum class InitMode { kIndependent, kDependent };
  InitMode init_mode = InitMode::kIndependent;
  /// Independent init: target linf error; defaults to
  /// nominal_scale * sqrt(dmax * log(dmax) / n).
  std::optional<double> init_target_linf;
  /// Dependent init: offline RGD steps from the diagonal-deletion start,
  /// after power_iters subspace power iterations sharpen it.
  int rgd_steps = 30;
  int power_iters = 10;
  double rgd_step_coeff = 1.0;  // multiplies the default d*/n step

  FormsSpec forms;
  int trials = 100;
  std::uint64_t seed = 0;
  std::vector<double> alphas{0.05};
  VarianceMode variance = VarianceMode::kHomoskedastic;
  bool fresh_truth = false;
  int threads = 0;  // 0 = hardware concurrency

  double resolved_lambda_min() const;
  std::int64_t resolved_n() const;
  void validate() const;
};

struct TrialFailure {
  int trial = 0;
  std::string message;
};

/// Inputs of one Monte Carlo trial. Exposed so external consumers (the CLI
/// round-trip tests) can rebuild the exact inputs of any trial.
struct TrialData {
  TuckerFactorization truth;
  DenseTensor truth_dense;
  ObservationSet obs;
  TuckerFactorization init;
};

TuckerFactorization experiment_truth(const ExperimentConfig& cfg, int trial);
NoiseModel experiment_noise(const ExperimentConfig& cfg, const DenseTensor& truth_dense);
TrialData materialize_trial(const ExperimentConfig& cfg, int trial);
LinearForm sparse01_form(const ExperimentConfig& cfg);
/// Coverage family: forms with +1 at (1,1,..,1), +1 at (1,1,..,2) and -1 at a
/// sampled cell; returns the forms and their true values.
std::vector<std::pair<LinearForm, double>> coverage_family(const ExperimentConfig& cfg,
                                                           const DenseTensor& truth_dense,
                                                           int trial);

struct CltReport {
  std::vector<double> statistics;  // per trial; NaN marks a failed trial
  std::vector<double> raw_errors;  // point - truth value
  double ks = 0.0;                 // distance to standard normal
  double mean = 0.0;
  double variance = 0.0;
  double raw_error_sd = 0.0;
  /// Population-level standard error computed at the truth's tangent space:
  /// homoskedastic sigma*||P_T(I)||_F*sqrt(d*/n), heteroskedastic
  /// ||P_T(I) .* S||_F*sqrt(d*/n).
  double reference_se = 0.0;
  int completed = 0;
  std::vector<TrialFailure> failures;
  double wall_seconds = 0.0;
};

CltReport run_clt_experiment(const ExperimentConfig& cfg);

struct CoverageAlpha {
  double alpha = 0.05;
  std::vector<double> avgcov;  // per trial
  double mean = 0.0;
  double stddev = 0.0;
  double bar_lo = 0.0;  // mean -/+ z_{0.1} * stddev, as reported error bars
  double bar_hi = 0.0;
};

struct CoverageReport {
  std::vector<CoverageAlpha> per_alpha;
  int completed = 0;
  std::vector<TrialFailure> failures;
  double wall_seconds = 0.0;
};

CoverageReport run_coverage_experiment(const ExperimentConfig& cfg);

/// Kolmogorov-Smirnov distance of a sample to the standard normal, computed
/// against the exact CDF without binning.
double ks_distance_to_normal(std::vector<double> sample);

}  // namespace tinfer
