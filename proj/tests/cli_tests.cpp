// End-to-end tests of the tinfer CLI, run as a subprocess. argv[1] is the
// binary path. Exits nonzero on the first failure.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tinfer/harness.hpp"
#include "tinfer/inference.hpp"
#include "tinfer/io.hpp"
#include "tinfer/sampling.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  if (!ok) {
    std::cerr << "[cli_tests] FAILED: " << what << "\n";
    ++g_failures;
  }
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& cmd) {
  const std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  RunResult r;
  if (pipe == nullptr) return r;
  char buf[4096];
  while (fgets(buf, sizeof(buf), pipe) != nullptr) r.out += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <tinfer-binary>\n";
    return 2;
  }
  const std::string bin = argv[1];
  const fs::path dir = fs::temp_directory_path() / "tinfer_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&dir](const std::string& name) { return (dir / name).string(); };

  // --help works for the app and every subcommand.
  check(run(bin + " --help").exit_code == 0, "--help exits 0");
  for (const char* sub : {"gen-truth", "sample-obs", "complete", "infer", "simulate-clt",
                          "simulate-coverage", "classify-regime"}) {
    const RunResult r = run(bin + " " + sub + " --help");
    check(r.exit_code == 0, std::string(sub) + " --help exits 0");
    check(r.out.find("--") != std::string::npos, std::string(sub) + " --help documents flags");
  }

  // Usage errors exit 2.
  check(run(bin + " complete --obs missing.csv --estimator debias_power --out x.json")
            .exit_code == 2,
        "missing --rank exits 2");
  check(run(bin + " no-such-command").exit_code == 2, "unknown subcommand exits 2");

  // gen-truth -> sample-obs -> complete -> infer round trip.
  check(run(bin + " gen-truth --dims 15,15,15 --rank 2,2,2 --gamma 1.5 --seed 7 --out " +
            p("truth.json")).exit_code == 0,
        "gen-truth runs");
  check(run(bin + " sample-obs --truth " + p("truth.json") +
            " --p 0.2 --noise gaussian:1.0 --seed 8 --out " + p("obs.csv")).exit_code == 0,
        "sample-obs runs");
  check(run(bin + " complete --obs " + p("obs.csv") +
            " --rank 2,2,2 --estimator rgd_offline --steps 30 --step-size 5 --dims 15,15,15 "
            "--out " + p("est.json")).exit_code == 0,
        "complete rgd_offline runs");

  {
    const tinfer::DenseTensor truth = tinfer::read_tensor_or_factorization(p("truth.json"));
    const tinfer::DenseTensor est = tinfer::read_tensor_or_factorization(p("est.json"));
    const double rel = tinfer::frobenius_norm(tinfer::subtract(est, truth)) /
                       tinfer::frobenius_norm(truth);
    check(rel < 0.05, "completion error below threshold, got " + std::to_string(rel));
  }

  {
    std::ofstream form(p("form.csv"));
    form << "i1,i2,i3,w\n1,1,1,1\n2,3,4,-1\n";
  }
  check(run(bin + " infer --obs " + p("obs.csv") + " --init " + p("est.json") + " --form " +
            p("form.csv") + " --alpha 0.05 --variance homo --truth " + p("truth.json") +
            " --out " + p("result.json")).exit_code == 0,
        "infer runs");
  {
    const std::string text = slurp(p("result.json"));
    nlohmann::json j = nlohmann::json::parse(text);
    const double se = j["se"].get<double>();
    const double lo = j["ci"][0].get<double>();
    const double hi = j["ci"][1].get<double>();
    const double point = j["point"].get<double>();
    check(std::abs((hi - point) - 1.959964 * se) < 1e-5 * std::max(1.0, se),
          "alpha=0.05 half-width is 1.959964*se");
    check(std::abs((point - lo) - (hi - point)) < 1e-9, "interval is centered");
    check(j.contains("statistic"), "statistic present when truth given");
    check(j["diagnostics"].contains("proj_norm"), "diagnostics carry proj_norm");
  }

  // Poisson data end to end in hetero mode: build a positive truth tensor.
  {
    tinfer::DenseTensor pos(tinfer::Shape({6, 6, 6}));
    for (std::int64_t i = 0; i < pos.size(); ++i) {
      pos[i] = 3.0 + 0.5 * std::sin(static_cast<double>(i));
    }
    tinfer::write_tensor_json(p("pos.json"), pos);
    check(run(bin + " sample-obs --truth " + p("pos.json") +
              " --n 4000 --noise poisson --seed 4 --out " + p("pobs.csv")).exit_code == 0,
          "poisson sample-obs runs");
    check(run(bin + " complete --obs " + p("pobs.csv") +
              " --rank 2,2,2 --estimator diag_deletion --dims 6,6,6 --out " +
              p("pinit.json")).exit_code == 0,
          "diag_deletion estimator runs");
    check(run(bin + " infer --obs " + p("pobs.csv") + " --init " + p("pinit.json") +
              " --form " + p("pform.csv") + " --alpha 0.1 --variance hetero --out " +
              p("presult.json")).exit_code == 2,
          "missing form file exits 2");
    {
      std::ofstream form(p("pform.csv"));
      form << "i1,i2,i3,w\n2,2,2,1\n";
    }
    check(run(bin + " infer --obs " + p("pobs.csv") + " --init " + p("pinit.json") +
              " --form " + p("pform.csv") + " --alpha 0.1 --variance hetero --out " +
              p("presult.json")).exit_code == 0,
          "hetero inference on poisson data runs");
    nlohmann::json j = nlohmann::json::parse(slurp(p("presult.json")));
    check(j["variance_mode"].get<std::string>() == "hetero", "variance_mode echoed");
    check(j["diagnostics"].contains("s_hat"), "hetero diagnostics carry s_hat");
  }

  // simulate-clt: dry run, schema failure, real run, threads determinism,
  // and cross-path bit-exact statistic via the library.
  {
    std::ofstream cfg(p("clt.json"));
    cfg << R"({"schema_version":1,"kind":"clt","shape":[10,10,10],"rank":[2,2,2],
      "gamma":1.0,"noise":{"kind":"gaussian","sigma":1.0},"sampling_rate":0.15,
      "init":{"mode":"independent"},"forms":{"type":"sparse01","support":2},
      "trials":12,"seed":31,"alphas":[0.05]})";
  }
  check(run(bin + " simulate-clt --config " + p("clt.json") + " --dry-run").exit_code == 0,
        "simulate-clt --dry-run exits 0");
  {
    std::ofstream cfg(p("bad.json"));
    cfg << R"({"schema_version":1,"kind":"clt","shape":[10,10,10],"rank":[2,2,2],
      "sampling_rate":0.15,"trials":0,"mystery":1})";
  }
  {
    const RunResult r = run(bin + " simulate-clt --config " + p("bad.json"));
    check(r.exit_code == 4, "schema violation exits 4");
    check(r.out.find("trials") != std::string::npos && r.out.find("mystery") != std::string::npos,
          "schema error lists offending keys");
  }
  check(run(bin + " simulate-clt --config " + p("clt.json") + " --threads 1 --out-prefix " +
            p("run1")).exit_code == 0,
        "simulate-clt runs (threads 1)");
  check(run(bin + " simulate-clt --config " + p("clt.json") + " --threads 3 --out-prefix " +
            p("run3")).exit_code == 0,
        "simulate-clt runs (threads 3)");
  check(slurp(p("run1.samples.csv")) == slurp(p("run3.samples.csv")),
        "sample CSVs byte-identical across thread counts");

  {
    // The CLI statistic for trial k must equal the library path bit for bit.
    tinfer::ExperimentConfig cfg = tinfer::read_experiment_config(p("clt.json"), "clt");
    cfg.threads = 1;
    const tinfer::CltReport report = tinfer::run_clt_experiment(cfg);
    const std::string csv = slurp(p("run1.samples.csv"));
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    bool all_match = true;
    int rows = 0;
    while (std::getline(lines, line)) {
      const auto comma = line.find(',');
      const int trial = std::stoi(line.substr(0, comma));
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g",
                    report.statistics[static_cast<std::size_t>(trial)]);
      all_match = all_match && line.substr(comma + 1) == buf;
      ++rows;
    }
    check(rows > 0, "sample CSV has rows");
    check(all_match, "CLI statistics match the library run bit for bit");
  }

  // simulate-coverage small run.
  {
    std::ofstream cfg(p("cov.json"));
    cfg << R"({"schema_version":1,"kind":"coverage","shape":[8,8,8],"rank":[2,2,2],
      "gamma":1.0,"noise":{"kind":"gaussian","sigma":0.5},"sampling_rate":0.3,
      "init":{"mode":"independent"},"forms":{"type":"coverage_family","count":10},
      "trials":5,"seed":13,"alphas":[0.05,0.1]})";
  }
  check(run(bin + " simulate-coverage --config " + p("cov.json") + " --out-prefix " +
            p("cov")).exit_code == 0,
        "simulate-coverage runs");
  check(slurp(p("cov.samples.csv")).rfind("trial,alpha,avgcov", 0) == 0,
        "coverage samples CSV header");

  // classify-regime via flags and config.
  {
    const RunResult r = run(bin + " classify-regime --dims 100,100,100 --snr 1e6 --n 1e5");
    check(r.exit_code == 0, "classify-regime flags run");
    check(r.out.find("\"region\"") != std::string::npos, "regime report printed");
  }
  {
    std::ofstream cfg(p("regime.json"));
    cfg << R"({"schema_version":1,"kind":"regime","snr":50.0,"n":40.0,"shape":[100,100,100]})";
  }
  {
    const RunResult r = run(bin + " classify-regime --config " + p("regime.json"));
    check(r.exit_code == 0, "classify-regime config runs");
    check(r.out.find("\"A\"") != std::string::npos, "n below dmax lands in region A");
  }

  // Numeric failures exit 3: an all-zero estimate has no condition number.
  {
    {
      std::ofstream zero(p("zero_obs.csv"));
      zero << "i1,i2,i3,y\n";
      for (int i = 1; i <= 4; ++i) zero << i << "," << i << "," << i << ",0\n";
    }
    const RunResult r = run(bin + " complete --obs " + p("zero_obs.csv") +
                            " --rank 2,2,2 --estimator diag_deletion --dims 4,4,4 --out " +
                            p("zero_est.json"));
    check(r.exit_code == 3, "degenerate numeric result exits 3");
    check(r.out.find("diagnostics") != std::string::npos, "numeric error names the stage");
  }

  fs::remove_all(dir);
  if (g_failures == 0) {
    std::printf("[cli_tests] all checks passed\n");
    return 0;
  }
  std::printf("[cli_tests] %d checks failed\n", g_failures);
  return 1;
}
