#include "tinfer/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "tinfer/errors.hpp"
#include "tinfer/estimators.hpp"
#include "tinfer/parallel.hpp"
#include "tinfer/rng.hpp"

namespace tinfer {

double NoiseSpec::nominal_scale() const {
  switch (kind) {
    case Kind::kGaussian: return sigma;
    case Kind::kHeteroUniform: return hi;
    default: return 1.0;
  }
}

double ExperimentConfig::resolved_lambda_min() const {
  if (lambda_min.has_value()) return *lambda_min;
  return lambda_coeff * std::pow(static_cast<double>(shape.max_dim()), gamma);
}

std::int64_t ExperimentConfig::resolved_n() const {
  if (n.has_value()) return *n;
  return static_cast<std::int64_t>(
      std::llround(*sampling_rate * static_cast<double>(shape.num_entries())));
}

void ExperimentConfig::validate() const {
  rank.validate_for(shape);
  if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (n.has_value() == sampling_rate.has_value()) {
    throw std::invalid_argument("ExperimentConfig: exactly one of n and sampling_rate");
  }
  if (sampling_rate.has_value() && !(*sampling_rate > 0.0 && *sampling_rate <= 1.0)) {
    throw std::invalid_argument("ExperimentConfig: sampling_rate must lie in (0,1]");
  }
  if (n.has_value() && (*n < 1 || *n > 20 * shape.num_entries())) {
    throw std::invalid_argument("ExperimentConfig: n must lie in [1, 20*d*]");
  }
  if (alphas.empty()) throw std::invalid_argument("ExperimentConfig: needs at least one alpha");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("ExperimentConfig: alpha must lie in (0,1)");
    }
  }
  if (!(resolved_lambda_min() > 0.0)) {
    throw std::invalid_argument("ExperimentConfig: lambda_min must be positive");
  }
  if (rgd_steps < 0) throw std::invalid_argument("ExperimentConfig: rgd_steps must be >= 0");
}

TuckerFactorization experiment_truth(const ExperimentConfig& cfg, int trial) {
  GroundTruthSpec spec;
  spec.shape = cfg.shape;
  spec.rank = cfg.rank;
  spec.lambda_min = cfg.resolved_lambda_min();
  spec.kappa0 = cfg.kappa0;
  spec.seed = cfg.seed;
  spec.trial = cfg.fresh_truth ? static_cast<std::uint64_t>(trial) : 0;
  return generate_ground_truth(spec);
}

NoiseModel experiment_noise(const ExperimentConfig& cfg, const DenseTensor& truth_dense) {
  switch (cfg.noise.kind) {
    case NoiseSpec::Kind::kGaussian:
      return NoiseModel::gaussian(cfg.noise.sigma);
    case NoiseSpec::Kind::kHeteroUniform:
      // The sd field is a property of the instance, fixed across trials.
      return NoiseModel::custom_sd(
          uniform_sd_field(truth_dense.shape(), cfg.noise.lo, cfg.noise.hi, cfg.seed, 0));
    case NoiseSpec::Kind::kPoisson:
      return NoiseModel::poisson();
    case NoiseSpec::Kind::kExponential:
      return NoiseModel::exponential();
    case NoiseSpec::Kind::kBernoulli:
      return NoiseModel::bernoulli();
  }
  throw std::invalid_argument("experiment_noise: unknown noise kind");
}

TrialData materialize_trial(const ExperimentConfig& cfg, int trial) {
  TrialData data;
  data.truth = experiment_truth(cfg, trial);
  data.truth_dense = reconstruct(data.truth);
  const NoiseModel noise = experiment_noise(cfg, data.truth_dense);
  data.obs = sample_observations(data.truth_dense, cfg.resolved_n(), noise, cfg.seed,
                                 static_cast<std::uint64_t>(trial));

  if (cfg.init_mode == ExperimentConfig::InitMode::kIndependent) {
    double target = cfg.init_target_linf.value_or(
        cfg.noise.nominal_scale() *
        std::sqrt(static_cast<double>(cfg.shape.max_dim()) *
                  std::log(static_cast<double>(cfg.shape.max_dim())) /
                  static_cast<double>(cfg.resolved_n())));
    data.init = make_independent_init(data.truth, target, cfg.seed,
                                      static_cast<std::uint64_t>(trial));
  } else {
    EstimatorConfig est;
    est.rank = cfg.rank;
    est.steps = cfg.rgd_steps;
    est.step_size = cfg.rgd_step_coeff * static_cast<double>(cfg.shape.num_entries()) /
                    static_cast<double>(cfg.resolved_n());
    TuckerFactorization start = diag_deletion_init(data.obs, cfg.rank);
    if (cfg.power_iters > 0) {
      start = spectral_power_refine(data.obs, start, cfg.power_iters);
    }
    data.init = cfg.rgd_steps > 0 ? rgd_offline(data.obs, start, est).estimate : start;
  }
  return data;
}

LinearForm sparse01_form(const ExperimentConfig& cfg) {
  Rng rng(cfg.seed, 0, StreamPurpose::kForms);
  const std::int64_t cells = cfg.shape.num_entries();
  if (cfg.forms.support < 1 || static_cast<std::int64_t>(cfg.forms.support) > cells) {
    throw std::invalid_argument("sparse01_form: support out of range");
  }
  std::vector<std::pair<std::int64_t, double>> entries;
  std::vector<std::int64_t> seen;
  while (static_cast<int>(entries.size()) < cfg.forms.support) {
    const std::int64_t cell = rng.uniform_int(cells);
    if (std::find(seen.begin(), seen.end(), cell) != seen.end()) continue;
    seen.push_back(cell);
    entries.emplace_back(cell, 1.0);
  }
  return LinearForm(cfg.shape, std::move(entries));
}

std::vector<std::pair<LinearForm, double>> coverage_family(const ExperimentConfig& cfg,
                                                           const DenseTensor& truth_dense,
                                                           int trial) {
  const std::uint64_t stream_trial =
      cfg.forms.fixed_across_trials ? 0 : static_cast<std::uint64_t>(trial);
  Rng rng(cfg.seed, stream_trial, StreamPurpose::kForms);
  const Shape& shape = cfg.shape;
  const int m = shape.order();

  // Anchor cells (1,1,...,1) and (1,1,...,2) in 1-based terms.
  std::vector<int> first(static_cast<std::size_t>(m), 0);
  std::vector<int> second(static_cast<std::size_t>(m), 0);
  if (shape.dim(m - 1) < 2) {
    throw std::invalid_argument("coverage_family: last mode must have dimension >= 2");
  }
  second[static_cast<std::size_t>(m - 1)] = 1;
  const std::int64_t off_first = shape.offset_of(first);
  const std::int64_t off_second = shape.offset_of(second);

  std::vector<std::pair<LinearForm, double>> out;
  out.reserve(static_cast<std::size_t>(cfg.forms.count));
  for (int q = 0; q < cfg.forms.count; ++q) {
    const std::int64_t cell = rng.uniform_int(shape.num_entries());
    std::vector<std::pair<std::int64_t, double>> entries{
        {off_first, 1.0}, {off_second, 1.0}, {cell, -1.0}};
    LinearForm form(shape, std::move(entries));
    const double value = form.value_of(truth_dense);
    out.emplace_back(std::move(form), value);
  }
  return out;
}

double ks_distance_to_normal(std::vector<double> sample) {
  if (sample.empty()) return 1.0;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double phi = normal_cdf(sample[i]);
    const double hi = (static_cast<double>(i) + 1.0) / n - phi;
    const double lo = phi - static_cast<double>(i) / n;
    ks = std::max(ks, std::max(hi, lo));
  }
  return ks;
}

namespace {

struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
};

MomentSummary moments(const std::vector<double>& values) {
  MomentSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= static_cast<double>(values.size() - 1);
  }
  return s;
}

}  // namespace

CltReport run_clt_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  const LinearForm form = sparse01_form(cfg);
  CltReport report;
  report.statistics.assign(static_cast<std::size_t>(cfg.trials),
                           std::numeric_limits<double>::quiet_NaN());
  report.raw_errors.assign(static_cast<std::size_t>(cfg.trials),
                           std::numeric_limits<double>::quiet_NaN());

  // Reference standard error at the truth's tangent space (fixed-truth runs).
  // Failures here surface per trial below, so they are not fatal.
  if (!cfg.fresh_truth) {
    try {
      const TuckerFactorization truth = experiment_truth(cfg, 0);
      const DenseTensor truth_dense = reconstruct(truth);
      const DenseTensor projected = tangent_project_at(truth, form.dense());
      const double scale_factor = std::sqrt(static_cast<double>(cfg.shape.num_entries()) /
                                            static_cast<double>(cfg.resolved_n()));
      const NoiseModel noise = experiment_noise(cfg, truth_dense);
      const DenseTensor sd = sd_tensor(truth_dense, noise);
      report.reference_se = frobenius_norm(hadamard(projected, sd)) * scale_factor;
    } catch (const std::exception&) {
      report.reference_se = 0.0;
    }
  }

  std::mutex failure_mutex;
  parallel_for(cfg.trials, cfg.threads, [&](std::int64_t trial) {
    try {
      const TrialData data = materialize_trial(cfg, static_cast<int>(trial));
      const double truth_value = form.value_of(data.truth_dense);
      InferOptions options;
      options.alpha = cfg.alphas.front();
      options.variance = cfg.variance;
      options.truth_value = truth_value;
      const InferenceResult r = infer(data.obs, data.init, form, options);
      report.raw_errors[static_cast<std::size_t>(trial)] = r.point - truth_value;
      if (r.statistic.has_value()) {
        report.statistics[static_cast<std::size_t>(trial)] = *r.statistic;
      }
    } catch (const std::exception& e) {
      std::scoped_lock lock(failure_mutex);
      report.failures.push_back(TrialFailure{static_cast<int>(trial), e.what()});
    }
  });

  std::sort(report.failures.begin(), report.failures.end(),
            [](const TrialFailure& a, const TrialFailure& b) { return a.trial < b.trial; });

  std::vector<double> ok_stats;
  std::vector<double> ok_errors;
  for (std::size_t i = 0; i < report.statistics.size(); ++i) {
    if (std::isfinite(report.statistics[i])) ok_stats.push_back(report.statistics[i]);
    if (std::isfinite(report.raw_errors[i])) ok_errors.push_back(report.raw_errors[i]);
  }
  report.completed = static_cast<int>(ok_stats.size());
  const MomentSummary stat_moments = moments(ok_stats);
  report.mean = stat_moments.mean;
  report.variance = stat_moments.variance;
  report.raw_error_sd = std::sqrt(moments(ok_errors).variance);
  report.ks = ks_distance_to_normal(ok_stats);

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CoverageReport run_coverage_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  CoverageReport report;
  report.per_alpha.resize(cfg.alphas.size());
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
    report.per_alpha[a].alpha = cfg.alphas[a];
    report.per_alpha[a].avgcov.assign(static_cast<std::size_t>(cfg.trials),
                                      std::numeric_limits<double>::quiet_NaN());
  }

  std::mutex failure_mutex;
  parallel_for(cfg.trials, cfg.threads, [&](std::int64_t trial) {
    try {
      const TrialData data = materialize_trial(cfg, static_cast<int>(trial));
      const auto family = coverage_family(cfg, data.truth_dense, static_cast<int>(trial));

      std::vector<LinearForm> forms;
      std::vector<double> truths;
      forms.reserve(family.size());
      truths.reserve(family.size());
      for (const auto& [f, v] : family) {
        forms.push_back(f);
        truths.push_back(v);
      }
      InferOptions options;
      options.alpha = cfg.alphas.front();
      options.variance = cfg.variance;
      const SharedInference shared = infer_shared(data.obs, data.init, forms, options, truths);

      for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        const double alpha = cfg.alphas[a];
        int covered = 0;
        for (std::size_t q = 0; q < shared.forms.size(); ++q) {
          const InferenceResult& r = shared.forms[q];
          auto [lo, hi] = confidence_interval(r.point, r.se, alpha);
          // Tiny slack so that degenerate zero-width intervals (exact
          // zero-noise runs) count the truth they hit up to rounding.
          const double slack = 1e-9 * std::max(1.0, std::abs(r.point));
          if (lo - slack <= truths[q] && truths[q] <= hi + slack) ++covered;
        }
        report.per_alpha[a].avgcov[static_cast<std::size_t>(trial)] =
            static_cast<double>(covered) / static_cast<double>(shared.forms.size());
      }
    } catch (const std::exception& e) {
      std::scoped_lock lock(failure_mutex);
      report.failures.push_back(TrialFailure{static_cast<int>(trial), e.what()});
    }
  });

  std::sort(report.failures.begin(), report.failures.end(),
            [](const TrialFailure& a, const TrialFailure& b) { return a.trial < b.trial; });

  const double z01 = normal_quantile(0.9);  // error bars at mean -/+ z_{0.1} * sd
  int completed = 0;
  for (CoverageAlpha& pa : report.per_alpha) {
    std::vector<double> ok;
    for (double v : pa.avgcov) {
      if (std::isfinite(v)) ok.push_back(v);
    }
    completed = static_cast<int>(ok.size());
    const MomentSummary ms = moments(ok);
    pa.mean = ms.mean;
    pa.stddev = std::sqrt(ms.variance);
    pa.bar_lo = pa.mean - z01 * pa.stddev;
    pa.bar_hi = pa.mean + z01 * pa.stddev;
  }
  report.completed = completed;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace tinfer
