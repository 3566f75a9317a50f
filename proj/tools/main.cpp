// Command-line driver for noisy Tucker tensor completion and linear-form
// inference. Exit codes: 0 success, 2 usage/parse error, 3 numeric failure,
// 4 config schema violation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tinfer/errors.hpp"
#include "tinfer/estimators.hpp"
#include "tinfer/harness.hpp"
#include "tinfer/inference.hpp"
#include "tinfer/io.hpp"
#include "tinfer/regime.hpp"
#include "tinfer/sampling.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitSchema = 4;

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (cur.empty()) throw std::invalid_argument(flag + ": empty component in '" + text + "'");
      out.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed.has_value()) return *seed;
  std::random_device rd;
  const std::uint64_t v =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cerr << "note: no --seed given, using seed " << v << "\n";
  return v;
}

tinfer::NoiseModel parse_noise(const std::string& text, const tinfer::DenseTensor& truth) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "gaussian") {
    return tinfer::NoiseModel::gaussian(arg.empty() ? 1.0 : std::stod(arg));
  }
  if (kind == "bernoulli") return tinfer::NoiseModel::bernoulli();
  if (kind == "poisson") return tinfer::NoiseModel::poisson();
  if (kind == "exponential") return tinfer::NoiseModel::exponential();
  if (kind == "custom") {
    if (arg.empty()) throw std::invalid_argument("--noise custom:FILE needs a sd tensor file");
    tinfer::DenseTensor sd = tinfer::read_tensor_json(arg);
    if (!(sd.shape() == truth.shape())) {
      throw std::invalid_argument("--noise custom: sd tensor shape does not match truth");
    }
    return tinfer::NoiseModel::custom_sd(std::move(sd));
  }
  throw std::invalid_argument(
      "--noise must be gaussian[:SIGMA], bernoulli, poisson, exponential or custom:FILE");
}

struct GenTruthArgs {
  std::string dims, rank, out;
  double lambda_min = 0.0;
  double gamma = 0.0;
  double lambda_coeff = 10.0;
  double kappa0 = 10.0;
  bool has_lambda_min = false, has_gamma = false;
  std::optional<std::uint64_t> seed;
};

int run_gen_truth(const GenTruthArgs& args) {
  tinfer::GroundTruthSpec spec;
  spec.shape = tinfer::Shape(parse_int_list(args.dims, "--dims"));
  spec.rank = tinfer::MultilinearRank(parse_int_list(args.rank, "--rank"));
  if (args.has_lambda_min == args.has_gamma) {
    throw CLI::ValidationError("gen-truth", "give exactly one of --lambda-min and --gamma");
  }
  spec.lambda_min = args.has_lambda_min
                        ? args.lambda_min
                        : args.lambda_coeff *
                              std::pow(static_cast<double>(spec.shape.max_dim()), args.gamma);
  spec.kappa0 = args.kappa0;
  spec.seed = resolve_seed(args.seed);
  const tinfer::TuckerFactorization truth = tinfer::generate_ground_truth(spec);
  tinfer::write_factorization_json(args.out, truth);
  const tinfer::TuckerDiagnostics diag = tinfer::diagnostics(truth);
  std::printf("{\"lambda_min\": %.17g, \"lambda_max\": %.17g, \"kappa\": %.17g, \"dof\": %lld}\n",
              diag.lambda_min, diag.lambda_max, diag.kappa,
              static_cast<long long>(diag.dof));
  return kExitOk;
}

struct SampleObsArgs {
  std::string truth, out;
  std::string noise = "gaussian:1.0";
  std::int64_t n = 0;
  double p = 0.0;
  std::optional<std::uint64_t> seed;
};

int run_sample_obs(const SampleObsArgs& args) {
  const tinfer::DenseTensor truth = tinfer::read_tensor_or_factorization(args.truth);
  if ((args.n > 0) == (args.p > 0.0)) {
    throw CLI::ValidationError("sample-obs", "give exactly one of --n and --p");
  }
  const std::int64_t n =
      args.n > 0 ? args.n
                 : static_cast<std::int64_t>(
                       std::llround(args.p * static_cast<double>(truth.shape().num_entries())));
  const tinfer::NoiseModel noise = parse_noise(args.noise, truth);
  const std::uint64_t seed = resolve_seed(args.seed);
  const tinfer::ObservationSet obs = tinfer::sample_observations(truth, n, noise, seed);
  tinfer::write_observations_csv(args.out, obs);
  std::printf("{\"n\": %lld, \"cells\": %lld, \"seed\": %llu}\n",
              static_cast<long long>(obs.count()),
              static_cast<long long>(truth.shape().num_entries()),
              static_cast<unsigned long long>(seed));
  return kExitOk;
}

struct CompleteArgs {
  std::string obs, rank, estimator, out;
  std::string init, dims;
  int steps = 30;
  double step_size = 0.0;
  double eta_coeff = 1.0;
  double tolerance = 0.0;
};

int run_complete(const CompleteArgs& args) {
  const tinfer::MultilinearRank rank(parse_int_list(args.rank, "--rank"));
  std::optional<tinfer::Shape> shape;
  std::optional<tinfer::TuckerFactorization> init;
  if (!args.init.empty()) {
    init = tinfer::read_factorization_json(args.init);
    shape = init->ambient_shape();
  }
  if (!args.dims.empty()) shape = tinfer::Shape(parse_int_list(args.dims, "--dims"));
  const tinfer::ObservationSet obs = tinfer::read_observations_csv(args.obs, shape);

  tinfer::EstimatorConfig cfg;
  cfg.rank = rank;
  cfg.steps = args.steps;
  if (args.step_size > 0.0) cfg.step_size = args.step_size;
  cfg.online_step_coeff = args.eta_coeff;
  cfg.tolerance = args.tolerance;

  tinfer::TuckerFactorization result;
  std::vector<double> trajectory;
  if (args.estimator == "diag_deletion") {
    result = tinfer::diag_deletion_init(obs, rank);
  } else {
    const tinfer::TuckerFactorization start =
        init.has_value() ? *init
                         : tinfer::spectral_power_refine(
                               obs, tinfer::diag_deletion_init(obs, rank), 10);
    if (args.estimator == "debias_power") {
      result = tinfer::debias_power_iteration(obs, start);
    } else if (args.estimator == "rgd_offline") {
      result = tinfer::rgd_offline(obs, start, cfg).estimate;
    } else if (args.estimator == "rgd_online") {
      result = tinfer::rgd_online(obs, start, cfg).estimate;
    } else {
      throw CLI::ValidationError(
          "complete", "--estimator must be one of debias_power, rgd_offline, rgd_online, "
                      "diag_deletion");
    }
  }
  tinfer::write_factorization_json(args.out, result);
  const tinfer::TuckerDiagnostics diag = tinfer::diagnostics(result);
  std::printf("{\"lambda_min\": %.17g, \"lambda_max\": %.17g, \"kappa\": %.17g, \"dof\": %lld}\n",
              diag.lambda_min, diag.lambda_max, diag.kappa,
              static_cast<long long>(diag.dof));
  return kExitOk;
}

struct InferArgs {
  std::string obs, init, form, out;
  std::string truth, dims;
  double alpha = 0.05;
  std::string variance = "homo";
  bool proj_at_estimate = false;
};

int run_infer(const InferArgs& args) {
  const tinfer::TuckerFactorization init = tinfer::read_factorization_json(args.init);
  tinfer::Shape shape = init.ambient_shape();
  if (!args.dims.empty()) shape = tinfer::Shape(parse_int_list(args.dims, "--dims"));
  const tinfer::ObservationSet obs = tinfer::read_observations_csv(args.obs, shape);
  const tinfer::LinearForm form = tinfer::read_form_csv(args.form, shape);

  tinfer::InferOptions options;
  options.alpha = args.alpha;
  if (args.variance == "homo") {
    options.variance = tinfer::VarianceMode::kHomoskedastic;
  } else if (args.variance == "hetero") {
    options.variance = tinfer::VarianceMode::kHeteroskedastic;
  } else {
    throw CLI::ValidationError("infer", "--variance must be homo or hetero");
  }
  options.proj_norm_at_estimate = args.proj_at_estimate;
  if (!args.truth.empty()) {
    const tinfer::DenseTensor truth = tinfer::read_tensor_or_factorization(args.truth);
    options.truth_value = form.value_of(truth);
  }
  const tinfer::InferenceResult result = tinfer::infer(obs, init, form, options);
  tinfer::write_inference_result_json(args.out, result);
  if (result.degenerate) {
    std::cerr << "warning: degenerate standard error (se = 0); interval collapsed to the point\n";
  }
  std::printf("{\"point\": %.17g, \"se\": %.17g, \"ci\": [%.17g, %.17g]}\n", result.point,
              result.se, result.ci_lo, result.ci_hi);
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::string out_prefix;
  bool dry_run = false;
  int threads = -1;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args, bool coverage) {
  tinfer::ExperimentConfig cfg =
      tinfer::read_experiment_config(args.config, coverage ? "coverage" : "clt");
  if (args.threads >= 0) cfg.threads = args.threads;
  if (args.seed.has_value()) cfg.seed = *args.seed;
  const std::string kind = coverage ? "coverage" : "clt";
  if (args.dry_run) {
    std::cout << tinfer::experiment_config_to_json(cfg, kind) << "\n";
    return kExitOk;
  }
  std::string prefix = args.out_prefix;
  if (prefix.empty()) {
    prefix = args.config;
    if (prefix.size() > 5 && prefix.substr(prefix.size() - 5) == ".json") {
      prefix = prefix.substr(0, prefix.size() - 5);
    }
  }
  if (coverage) {
    const tinfer::CoverageReport report = tinfer::run_coverage_experiment(cfg);
    tinfer::write_coverage_report_json(prefix + ".report.json", cfg, report);
    tinfer::write_coverage_samples_csv(prefix + ".samples.csv", report);
    for (const auto& pa : report.per_alpha) {
      std::printf("alpha=%.4g nominal=%.4g mean_avgcov=%.6f +/- %.6f\n", pa.alpha,
                  1.0 - pa.alpha, pa.mean, pa.bar_hi - pa.mean);
    }
    std::printf("completed=%d failures=%zu wall=%.1fs\n", report.completed,
                report.failures.size(), report.wall_seconds);
  } else {
    const tinfer::CltReport report = tinfer::run_clt_experiment(cfg);
    tinfer::write_clt_report_json(prefix + ".report.json", cfg, report);
    tinfer::write_clt_samples_csv(prefix + ".samples.csv", report);
    std::printf("ks=%.6f mean=%.6f variance=%.6f completed=%d failures=%zu wall=%.1fs\n",
                report.ks, report.mean, report.variance, report.completed,
                report.failures.size(), report.wall_seconds);
  }
  std::printf("report: %s.report.json\nsamples: %s.samples.csv\n", prefix.c_str(),
              prefix.c_str());
  return kExitOk;
}

struct RegimeArgs {
  std::string config;
  std::string dims;
  double snr = -1.0;
  double n = -1.0;
  std::string out;
};

int run_classify_regime(const RegimeArgs& args) {
  tinfer::RegimeQuery query;
  if (!args.config.empty()) {
    query = tinfer::read_regime_config(args.config);
  } else {
    if (args.dims.empty() || args.snr < 0.0 || args.n <= 0.0) {
      throw CLI::ValidationError("classify-regime",
                                 "give --config FILE or all of --dims, --snr, --n");
    }
    query.shape = tinfer::Shape(parse_int_list(args.dims, "--dims"));
    query.snr = args.snr;
    query.n = args.n;
  }
  const tinfer::RegimeReport report = tinfer::classify_regime(query.snr, query.n, query.shape);
  if (!report.balanced) {
    std::cerr << "warning: unbalanced dimensions (max/min = " << report.imbalance
              << " > 2); thresholds assume balanced dimensions\n";
  }
  const std::string text = tinfer::regime_report_to_json(query, report);
  if (!args.out.empty()) {
    std::ofstream f(args.out, std::ios::binary);
    f << text << "\n";
  }
  std::cout << text << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy Tucker tensor completion with uncertainty quantification"};
  app.require_subcommand(1);

  GenTruthArgs gen;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen-truth", "Generate an incoherent low-rank ground-truth factorization (JSON)");
  gen_cmd->add_option("--dims", gen.dims, "Tensor dimensions, e.g. 30,30,30")->required();
  gen_cmd->add_option("--rank", gen.rank, "Multilinear rank, e.g. 2,2,2")->required();
  gen_cmd->add_option("--lambda-min", gen.lambda_min, "Smallest unfolding singular value")
      ->check(CLI::PositiveNumber)
      ->each([&gen](const std::string&) { gen.has_lambda_min = true; });
  gen_cmd->add_option("--gamma", gen.gamma, "Signal exponent: lambda_min = coeff * dmax^gamma")
      ->each([&gen](const std::string&) { gen.has_gamma = true; });
  gen_cmd->add_option("--lambda-coeff", gen.lambda_coeff, "Coefficient for --gamma (default 10)");
  gen_cmd->add_option("--kappa0", gen.kappa0, "Cap on the core spectrum ramp (default 10)");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed (default: OS entropy, printed)");
  gen_cmd->add_option("--out", gen.out, "Output factorization JSON")->required();

  SampleObsArgs smp;
  CLI::App* smp_cmd = app.add_subcommand(
      "sample-obs", "Sample noisy observations (CSV: i1,...,im,y with 1-based indices)");
  smp_cmd->add_option("--truth", smp.truth, "Truth tensor or factorization JSON")->required();
  smp_cmd->add_option("--n", smp.n, "Number of samples (with replacement)");
  smp_cmd->add_option("--p", smp.p, "Sampling rate; n = round(p * d*)");
  smp_cmd->add_option("--noise", smp.noise,
                      "gaussian[:SIGMA] | bernoulli | poisson | exponential | custom:SD_FILE");
  smp_cmd->add_option("--seed", smp.seed, "RNG seed (default: OS entropy, printed)");
  smp_cmd->add_option("--out", smp.out, "Output CSV path")->required();

  CompleteArgs cmp;
  CLI::App* cmp_cmd =
      app.add_subcommand("complete", "Estimate a low-rank tensor from observations");
  cmp_cmd->add_option("--obs", cmp.obs, "Observation CSV")->required();
  cmp_cmd->add_option("--rank", cmp.rank, "Multilinear rank, e.g. 2,2,2")->required();
  cmp_cmd
      ->add_option("--estimator", cmp.estimator,
                   "debias_power | rgd_offline | rgd_online | diag_deletion")
      ->required();
  cmp_cmd->add_option("--init", cmp.init,
                      "Warm-start factorization JSON (default: diagonal-deletion start "
                      "plus 10 power iterations)");
  cmp_cmd->add_option("--steps", cmp.steps, "RGD step count (default 30)");
  cmp_cmd->add_option("--step-size", cmp.step_size, "Offline RGD step size (default d*/n)");
  cmp_cmd->add_option("--eta-coeff", cmp.eta_coeff,
                      "Online RGD step coefficient c0 in eta = c0 log(dmax)/n (default 1)");
  cmp_cmd->add_option("--tolerance", cmp.tolerance, "Offline early-stop relative change");
  cmp_cmd->add_option("--dims", cmp.dims, "Tensor dimensions (default: from --init or max index)");
  cmp_cmd->add_option("--out", cmp.out, "Output factorization JSON")->required();

  InferArgs inf;
  CLI::App* inf_cmd = app.add_subcommand(
      "infer", "Linear-form inference: point estimate, standard error, confidence interval");
  inf_cmd->add_option("--obs", inf.obs, "Observation CSV")->required();
  inf_cmd->add_option("--init", inf.init, "Warm initialization factorization JSON")->required();
  inf_cmd->add_option("--form", inf.form, "Linear form CSV (i1,...,im,w)")->required();
  inf_cmd->add_option("--alpha", inf.alpha, "Miscoverage level (default 0.05)");
  inf_cmd->add_option("--variance", inf.variance, "homo | hetero (default homo)");
  inf_cmd->add_option("--truth", inf.truth,
                      "Truth tensor/factorization JSON; enables the test statistic");
  inf_cmd->add_flag("--proj-at-estimate", inf.proj_at_estimate,
                    "Also report ||P(I)||_F at the final estimate (diagnostic)");
  inf_cmd->add_option("--dims", inf.dims, "Tensor dimensions (default: from --init)");
  inf_cmd->add_option("--out", inf.out, "Output result JSON")->required();

  SimulateArgs clt;
  CLI::App* clt_cmd = app.add_subcommand(
      "simulate-clt", "Monte Carlo normality study of the studentized statistic");
  clt_cmd->add_option("--config", clt.config, "Experiment config JSON")->required();
  clt_cmd->add_option("--out-prefix", clt.out_prefix,
                      "Output prefix (default: config path without .json)");
  clt_cmd->add_flag("--dry-run", clt.dry_run, "Print the resolved config and exit");
  clt_cmd->add_option("--threads", clt.threads, "Trial parallelism cap (0 = logical cores)");
  clt_cmd->add_option("--seed", clt.seed, "Override the config seed");

  SimulateArgs cov;
  CLI::App* cov_cmd =
      app.add_subcommand("simulate-coverage", "Monte Carlo confidence-interval coverage study");
  cov_cmd->add_option("--config", cov.config, "Experiment config JSON")->required();
  cov_cmd->add_option("--out-prefix", cov.out_prefix,
                      "Output prefix (default: config path without .json)");
  cov_cmd->add_flag("--dry-run", cov.dry_run, "Print the resolved config and exit");
  cov_cmd->add_option("--threads", cov.threads, "Trial parallelism cap (0 = logical cores)");
  cov_cmd->add_option("--seed", cov.seed, "Override the config seed");

  RegimeArgs reg;
  CLI::App* reg_cmd = app.add_subcommand(
      "classify-regime", "Locate (snr, n) among the inference feasibility regions A-E");
  reg_cmd->add_option("--config", reg.config, "Query config JSON {snr, n, shape}");
  reg_cmd->add_option("--dims", reg.dims, "Tensor dimensions, e.g. 100,100,100");
  reg_cmd->add_option("--snr", reg.snr, "Signal-to-noise ratio lambda_min / sigma");
  reg_cmd->add_option("--n", reg.n, "Sample count");
  reg_cmd->add_option("--out", reg.out, "Also write the report JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_truth(gen);
    if (smp_cmd->parsed()) return run_sample_obs(smp);
    if (cmp_cmd->parsed()) return run_complete(cmp);
    if (inf_cmd->parsed()) return run_infer(inf);
    if (clt_cmd->parsed()) return run_simulate(clt, /*coverage=*/false);
    if (cov_cmd->parsed()) return run_simulate(cov, /*coverage=*/true);
    if (reg_cmd->parsed()) return run_classify_regime(reg);
  } catch (const tinfer::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const tinfer::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
