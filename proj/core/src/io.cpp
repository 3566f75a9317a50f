#include "tinfer/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tinfer/errors.hpp"

namespace tinfer {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("JSON parse error in " + path + ": " + e.what());
  }
  return j;
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << text;
  if (!out) throw std::invalid_argument("write failed: " + path);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Shape shape_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() < 2) {
    throw std::invalid_argument(what + ": shape must be an array of >= 2 dimensions");
  }
  std::vector<int> dims;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
      throw std::invalid_argument(what + ": dimensions must be positive integers");
    }
    dims.push_back(v.get<int>());
  }
  return Shape(dims);
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw std::invalid_argument(what + ": matrix needs rows, cols, data");
  }
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  if (rows < 1 || cols < 1) throw std::invalid_argument(what + ": matrix dims must be positive");
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<std::int64_t>(data.size()) !=
                              static_cast<std::int64_t>(rows) * cols) {
    throw std::invalid_argument(what + ": matrix data length mismatch");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = data[i].get<double>();
  return m;
}

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

json tensor_to_json(const DenseTensor& t) {
  json j;
  j["shape"] = t.shape().dims();
  j["data"] = std::vector<double>(t.data().begin(), t.data().end());
  return j;
}

DenseTensor tensor_from_json(const json& j, const std::string& what) {
  if (!j.contains("shape") || !j.contains("data")) {
    throw std::invalid_argument(what + ": tensor needs shape and data");
  }
  Shape shape = shape_from_json(j.at("shape"), what);
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<std::int64_t>(data.size()) != shape.num_entries()) {
    throw std::invalid_argument(what + ": data length does not match shape");
  }
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& v : data) values.push_back(v.get<double>());
  return DenseTensor(shape, std::move(values));
}

}  // namespace

DenseTensor read_tensor_json(const std::string& path) {
  return tensor_from_json(load_json(path), path);
}

void write_tensor_json(const std::string& path, const DenseTensor& t) {
  save_text(path, tensor_to_json(t).dump());
}

TuckerFactorization read_factorization_json(const std::string& path) {
  const json j = load_json(path);
  if (!j.contains("core") || !j.contains("factors")) {
    throw std::invalid_argument(path + ": factorization needs core and factors");
  }
  TuckerFactorization f;
  f.core = tensor_from_json(j.at("core"), path);
  for (const auto& mj : j.at("factors")) {
    f.factors.push_back(matrix_from_json(mj, path));
  }
  if (f.core.shape().order() != static_cast<int>(f.factors.size())) {
    throw std::invalid_argument(path + ": factor count does not match core order");
  }
  validate(f);
  return f;
}

void write_factorization_json(const std::string& path, const TuckerFactorization& f) {
  json j;
  j["core"] = tensor_to_json(f.core);
  json factors = json::array();
  for (const Matrix& m : f.factors) factors.push_back(matrix_to_json(m));
  j["factors"] = std::move(factors);
  save_text(path, j.dump());
}

DenseTensor read_tensor_or_factorization(const std::string& path) {
  const json j = load_json(path);
  if (j.contains("core")) {
    TuckerFactorization f;
    f.core = tensor_from_json(j.at("core"), path);
    for (const auto& mj : j.at("factors")) f.factors.push_back(matrix_from_json(mj, path));
    validate(f);
    return reconstruct(f);
  }
  return tensor_from_json(j, path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ObservationSet read_observations_csv(const std::string& path, const std::optional<Shape>& shape) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty observation file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.back() != "y") {
    throw std::invalid_argument(path + ": expected header i1,...,im,y");
  }
  const int m = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < m; ++j) {
    if (header[static_cast<std::size_t>(j)] != "i" + std::to_string(j + 1)) {
      throw std::invalid_argument(path + ": expected header i1,...,im,y");
    }
  }
  if (shape.has_value() && shape->order() != m) {
    throw std::invalid_argument(path + ": index columns do not match the given shape order");
  }

  std::vector<std::vector<int>> indices;
  std::vector<double> values;
  std::vector<int> max_index(static_cast<std::size_t>(m), 1);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != m + 1) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": wrong column count");
    }
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      try {
        idx[static_cast<std::size_t>(j)] = std::stoi(fields[static_cast<std::size_t>(j)]);
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad index");
      }
      if (idx[static_cast<std::size_t>(j)] < 1) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": indices are 1-based and must be >= 1");
      }
      max_index[static_cast<std::size_t>(j)] =
          std::max(max_index[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(j)]);
    }
    double y = 0.0;
    try {
      y = std::stod(fields[static_cast<std::size_t>(m)]);
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad value");
    }
    indices.push_back(std::move(idx));
    values.push_back(y);
  }

  ObservationSet out;
  out.shape = shape.has_value() ? *shape : Shape(max_index);
  out.samples.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::vector<int> zero_based = indices[i];
    for (int j = 0; j < m; ++j) {
      zero_based[static_cast<std::size_t>(j)] -= 1;
      if (zero_based[static_cast<std::size_t>(j)] >= out.shape.dim(j)) {
        throw std::invalid_argument(path + ": index out of bounds for the given shape");
      }
    }
    out.samples.push_back(Observation{out.shape.offset_of(zero_based), values[i]});
  }
  return out;
}

void write_observations_csv(const std::string& path, const ObservationSet& obs) {
  std::ostringstream out;
  const int m = obs.shape.order();
  for (int j = 0; j < m; ++j) out << "i" << (j + 1) << ",";
  out << "y\n";
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  for (const Observation& s : obs.samples) {
    obs.shape.index_of(s.offset, idx);
    for (int j = 0; j < m; ++j) out << (idx[static_cast<std::size_t>(j)] + 1) << ",";
    out << fmt_double(s.y) << "\n";
  }
  save_text(path, out.str());
}

LinearForm read_form_csv(const std::string& path, const Shape& shape) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty form file");
  const auto header = split_csv_line(line);
  const int m = shape.order();
  if (static_cast<int>(header.size()) != m + 1 || header.back() != "w") {
    throw std::invalid_argument(path + ": expected header i1,...,im,w");
  }
  std::vector<std::pair<std::int64_t, double>> entries;
  std::vector<int> idx(static_cast<std::size_t>(m));
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != m + 1) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": wrong column count");
    }
    for (int j = 0; j < m; ++j) {
      int v = 0;
      try {
        v = std::stoi(fields[static_cast<std::size_t>(j)]);
      } catch (const std::exception&) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad index");
      }
      if (v < 1 || v > shape.dim(j)) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": 1-based index out of bounds");
      }
      idx[static_cast<std::size_t>(j)] = v - 1;
    }
    double w = 0.0;
    try {
      w = std::stod(fields[static_cast<std::size_t>(m)]);
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad weight");
    }
    entries.emplace_back(shape.offset_of(idx), w);
  }
  return LinearForm(shape, std::move(entries));
}

void write_form_csv(const std::string& path, const LinearForm& form) {
  std::ostringstream out;
  const int m = form.shape().order();
  for (int j = 0; j < m; ++j) out << "i" << (j + 1) << ",";
  out << "w\n";
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  for (const auto& [off, w] : form.entries()) {
    form.shape().index_of(off, idx);
    for (int j = 0; j < m; ++j) out << (idx[static_cast<std::size_t>(j)] + 1) << ",";
    out << fmt_double(w) << "\n";
  }
  save_text(path, out.str());
}

void write_inference_result_json(const std::string& path, const InferenceResult& r) {
  json j;
  j["point"] = r.point;
  j["se"] = r.se;
  if (r.statistic.has_value()) j["statistic"] = *r.statistic;
  j["ci"] = json::array({r.ci_lo, r.ci_hi});
  j["alpha"] = r.alpha;
  j["variance_mode"] =
      r.variance_mode == VarianceMode::kHomoskedastic ? "homo" : "hetero";
  json diag;
  if (r.sigma_hat.has_value()) diag["sigma_hat"] = *r.sigma_hat;
  if (r.s_hat.has_value()) diag["s_hat"] = *r.s_hat;
  diag["proj_norm"] = r.proj_norm;
  diag["alignment"] = r.alignment;
  diag["degenerate"] = r.degenerate;
  if (r.proj_norm_at_estimate.has_value()) {
    diag["proj_norm_at_estimate"] = *r.proj_norm_at_estimate;
  }
  j["diagnostics"] = std::move(diag);
  save_text(path, j.dump());
}

namespace {

// Accumulates schema violations so the error names every offending key.
class SchemaChecker {
 public:
  explicit SchemaChecker(const json& root, std::string path) : root_(root), path_(std::move(path)) {}

  void require_version() {
    if (!root_.contains("schema_version")) {
      issues_.push_back("schema_version: missing");
      return;
    }
    if (!root_["schema_version"].is_number_integer()) {
      issues_.push_back("schema_version: must be an integer");
      return;
    }
    if (root_["schema_version"].get<int>() != kSchemaVersion) {
      issues_.push_back("schema_version: unsupported major version " +
                        root_["schema_version"].dump() + " (reader supports " +
                        std::to_string(kSchemaVersion) + ")");
    }
  }

  void allow_keys(std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : root_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) issues_.push_back(key + ": unknown key");
    }
  }

  bool has(const char* key) const { return root_.contains(key); }
  const json& at(const char* key) const { return root_.at(key); }

  void fail(const std::string& msg) { issues_.push_back(msg); }

  void finish() const {
    if (issues_.empty()) return;
    std::string msg = path_ + ": config schema violations:";
    for (const std::string& issue : issues_) msg += "\n  - " + issue;
    throw SchemaError(msg);
  }

 private:
  const json& root_;
  std::string path_;
  std::vector<std::string> issues_;
};

}  // namespace

ExperimentConfig read_experiment_config(const std::string& path, const std::string& expected_kind) {
  const json j = load_json(path);
  SchemaChecker check(j, path);
  check.require_version();
  check.allow_keys({"schema_version", "kind", "shape", "rank", "lambda_coeff", "gamma",
                    "lambda_min", "kappa0", "noise", "sampling_rate", "n", "init", "forms",
                    "trials", "seed", "alphas", "variance", "fresh_truth", "threads"});

  ExperimentConfig cfg;

  if (!check.has("kind")) {
    check.fail("kind: missing (expected \"" + expected_kind + "\")");
  } else if (!check.at("kind").is_string() || check.at("kind").get<std::string>() != expected_kind) {
    check.fail("kind: expected \"" + expected_kind + "\", got " + check.at("kind").dump());
  }

  if (!check.has("shape")) {
    check.fail("shape: missing");
  } else {
    try {
      cfg.shape = shape_from_json(check.at("shape"), "shape");
    } catch (const std::exception& e) {
      check.fail(std::string("shape: ") + e.what());
    }
  }
  if (!check.has("rank")) {
    check.fail("rank: missing");
  } else {
    try {
      std::vector<int> r;
      for (const auto& v : check.at("rank")) r.push_back(v.get<int>());
      cfg.rank = MultilinearRank(r);
    } catch (const std::exception& e) {
      check.fail(std::string("rank: ") + e.what());
    }
  }

  auto get_number = [&](const char* key, double& out, bool positive) {
    if (!check.has(key)) return;
    if (!check.at(key).is_number()) {
      check.fail(std::string(key) + ": must be a number");
      return;
    }
    out = check.at(key).get<double>();
    if (positive && !(out > 0.0)) check.fail(std::string(key) + ": must be positive");
  };
  get_number("lambda_coeff", cfg.lambda_coeff, true);
  get_number("gamma", cfg.gamma, false);
  get_number("kappa0", cfg.kappa0, true);
  if (check.has("lambda_min")) {
    double v = 0.0;
    get_number("lambda_min", v, true);
    cfg.lambda_min = v;
  }

  if (check.has("noise")) {
    const json& nj = check.at("noise");
    const std::string kind = nj.value("kind", "");
    if (kind == "gaussian") {
      cfg.noise.kind = NoiseSpec::Kind::kGaussian;
      cfg.noise.sigma = nj.value("sigma", 1.0);
      if (cfg.noise.sigma < 0.0) check.fail("noise.sigma: must be >= 0");
    } else if (kind == "hetero_uniform") {
      cfg.noise.kind = NoiseSpec::Kind::kHeteroUniform;
      cfg.noise.lo = nj.value("lo", 0.75);
      cfg.noise.hi = nj.value("hi", 1.25);
      if (!(cfg.noise.lo >= 0.0 && cfg.noise.hi >= cfg.noise.lo)) {
        check.fail("noise.lo/hi: need 0 <= lo <= hi");
      }
    } else if (kind == "poisson") {
      cfg.noise.kind = NoiseSpec::Kind::kPoisson;
    } else if (kind == "exponential") {
      cfg.noise.kind = NoiseSpec::Kind::kExponential;
    } else if (kind == "bernoulli") {
      cfg.noise.kind = NoiseSpec::Kind::kBernoulli;
    } else {
      check.fail("noise.kind: must be one of gaussian, hetero_uniform, poisson, exponential, "
                 "bernoulli");
    }
  }

  if (check.has("sampling_rate") && check.has("n")) {
    check.fail("sampling_rate/n: give exactly one");
  } else if (check.has("sampling_rate")) {
    if (!check.at("sampling_rate").is_number() ||
        !(check.at("sampling_rate").get<double>() > 0.0) ||
        check.at("sampling_rate").get<double>() > 1.0) {
      check.fail("sampling_rate: must be a number in (0,1]");
    } else {
      cfg.sampling_rate = check.at("sampling_rate").get<double>();
    }
  } else if (check.has("n")) {
    if (!check.at("n").is_number_integer() || check.at("n").get<std::int64_t>() < 1) {
      check.fail("n: must be a positive integer");
    } else {
      cfg.n = check.at("n").get<std::int64_t>();
    }
  } else {
    check.fail("sampling_rate/n: one is required");
  }

  if (check.has("init")) {
    const json& ij = check.at("init");
    const std::string mode = ij.value("mode", "");
    if (mode == "independent") {
      cfg.init_mode = ExperimentConfig::InitMode::kIndependent;
      if (ij.contains("target_linf")) {
        if (!ij["target_linf"].is_number() || ij["target_linf"].get<double>() < 0.0) {
          check.fail("init.target_linf: must be a nonnegative number");
        } else {
          cfg.init_target_linf = ij["target_linf"].get<double>();
        }
      }
    } else if (mode == "dependent") {
      cfg.init_mode = ExperimentConfig::InitMode::kDependent;
      cfg.rgd_steps = ij.value("rgd_steps", 30);
      cfg.power_iters = ij.value("power_iters", 10);
      cfg.rgd_step_coeff = ij.value("step_coeff", 1.0);
      if (cfg.rgd_steps < 0) check.fail("init.rgd_steps: must be >= 0");
      if (cfg.power_iters < 0) check.fail("init.power_iters: must be >= 0");
      if (!(cfg.rgd_step_coeff > 0.0)) check.fail("init.step_coeff: must be positive");
    } else {
      check.fail("init.mode: must be \"independent\" or \"dependent\"");
    }
  }

  if (check.has("forms")) {
    const json& fj = check.at("forms");
    const std::string type = fj.value("type", "");
    if (type == "sparse01") {
      cfg.forms.type = FormsSpec::Type::kSparse01;
      cfg.forms.support = fj.value("support", 2);
      if (cfg.forms.support < 1) check.fail("forms.support: must be >= 1");
    } else if (type == "coverage_family") {
      cfg.forms.type = FormsSpec::Type::kCoverageFamily;
      cfg.forms.count = fj.value("count", 100);
      cfg.forms.fixed_across_trials = fj.value("fixed_across_trials", true);
      if (cfg.forms.count < 1) check.fail("forms.count: must be >= 1");
    } else {
      check.fail("forms.type: must be \"sparse01\" or \"coverage_family\"");
    }
  }

  if (check.has("trials")) {
    if (!check.at("trials").is_number_integer() || check.at("trials").get<int>() < 1) {
      check.fail("trials: must be a positive integer");
    } else {
      cfg.trials = check.at("trials").get<int>();
    }
  } else {
    check.fail("trials: missing");
  }
  if (check.has("seed")) {
    if (!check.at("seed").is_number_integer()) {
      check.fail("seed: must be an integer");
    } else {
      cfg.seed = check.at("seed").get<std::uint64_t>();
    }
  }
  if (check.has("alphas")) {
    cfg.alphas.clear();
    if (!check.at("alphas").is_array() || check.at("alphas").empty()) {
      check.fail("alphas: must be a non-empty array");
    } else {
      for (const auto& v : check.at("alphas")) {
        if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
          check.fail("alphas: entries must lie in (0,1)");
          break;
        }
        cfg.alphas.push_back(v.get<double>());
      }
    }
  }
  if (check.has("variance")) {
    const std::string v = check.at("variance").is_string() ? check.at("variance").get<std::string>() : "";
    if (v == "homo") {
      cfg.variance = VarianceMode::kHomoskedastic;
    } else if (v == "hetero") {
      cfg.variance = VarianceMode::kHeteroskedastic;
    } else {
      check.fail("variance: must be \"homo\" or \"hetero\"");
    }
  }
  if (check.has("fresh_truth")) {
    if (!check.at("fresh_truth").is_boolean()) {
      check.fail("fresh_truth: must be a boolean");
    } else {
      cfg.fresh_truth = check.at("fresh_truth").get<bool>();
    }
  }
  if (check.has("threads")) {
    if (!check.at("threads").is_number_integer() || check.at("threads").get<int>() < 0) {
      check.fail("threads: must be a nonnegative integer");
    } else {
      cfg.threads = check.at("threads").get<int>();
    }
  }

  check.finish();
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg, const std::string& kind) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["shape"] = cfg.shape.dims();
  j["rank"] = cfg.rank.ranks;
  if (cfg.lambda_min.has_value()) {
    j["lambda_min"] = *cfg.lambda_min;
  } else {
    j["lambda_coeff"] = cfg.lambda_coeff;
    j["gamma"] = cfg.gamma;
  }
  j["kappa0"] = cfg.kappa0;
  switch (cfg.noise.kind) {
    case NoiseSpec::Kind::kGaussian:
      j["noise"] = {{"kind", "gaussian"}, {"sigma", cfg.noise.sigma}};
      break;
    case NoiseSpec::Kind::kHeteroUniform:
      j["noise"] = {{"kind", "hetero_uniform"}, {"lo", cfg.noise.lo}, {"hi", cfg.noise.hi}};
      break;
    case NoiseSpec::Kind::kPoisson:
      j["noise"] = {{"kind", "poisson"}};
      break;
    case NoiseSpec::Kind::kExponential:
      j["noise"] = {{"kind", "exponential"}};
      break;
    case NoiseSpec::Kind::kBernoulli:
      j["noise"] = {{"kind", "bernoulli"}};
      break;
  }
  if (cfg.n.has_value()) {
    j["n"] = *cfg.n;
  } else {
    j["sampling_rate"] = *cfg.sampling_rate;
  }
  json init;
  if (cfg.init_mode == ExperimentConfig::InitMode::kIndependent) {
    init["mode"] = "independent";
    if (cfg.init_target_linf.has_value()) init["target_linf"] = *cfg.init_target_linf;
  } else {
    init["mode"] = "dependent";
    init["rgd_steps"] = cfg.rgd_steps;
    init["power_iters"] = cfg.power_iters;
    init["step_coeff"] = cfg.rgd_step_coeff;
  }
  j["init"] = std::move(init);
  json forms;
  if (cfg.forms.type == FormsSpec::Type::kSparse01) {
    forms["type"] = "sparse01";
    forms["support"] = cfg.forms.support;
  } else {
    forms["type"] = "coverage_family";
    forms["count"] = cfg.forms.count;
    forms["fixed_across_trials"] = cfg.forms.fixed_across_trials;
  }
  j["forms"] = std::move(forms);
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["alphas"] = cfg.alphas;
  j["variance"] = cfg.variance == VarianceMode::kHomoskedastic ? "homo" : "hetero";
  j["fresh_truth"] = cfg.fresh_truth;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

RegimeQuery read_regime_config(const std::string& path) {
  const json j = load_json(path);
  SchemaChecker check(j, path);
  check.require_version();
  check.allow_keys({"schema_version", "kind", "snr", "n", "shape"});
  if (!check.has("kind") || !check.at("kind").is_string() ||
      check.at("kind").get<std::string>() != "regime") {
    check.fail("kind: expected \"regime\"");
  }
  RegimeQuery q;
  if (!check.has("snr") || !check.at("snr").is_number() || !(check.at("snr").get<double>() >= 0.0)) {
    check.fail("snr: must be a nonnegative number");
  } else {
    q.snr = check.at("snr").get<double>();
  }
  if (!check.has("n") || !check.at("n").is_number() || !(check.at("n").get<double>() > 0.0)) {
    check.fail("n: must be a positive number");
  } else {
    q.n = check.at("n").get<double>();
  }
  if (!check.has("shape")) {
    check.fail("shape: missing");
  } else {
    try {
      q.shape = shape_from_json(check.at("shape"), "shape");
    } catch (const std::exception& e) {
      check.fail(std::string("shape: ") + e.what());
    }
  }
  check.finish();
  return q;
}

std::string regime_report_to_json(const RegimeQuery& query, const RegimeReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "regime-report";
  j["snr"] = query.snr;
  j["n"] = query.n;
  j["shape"] = query.shape.dims();
  j["region"] = std::string(1, region_letter(report.region));
  j["balanced"] = report.balanced;
  j["imbalance"] = report.imbalance;
  json checks = json::array();
  for (const ThresholdCheck& c : report.thresholds) {
    checks.push_back(json{{"name", c.name},
                          {"snr_threshold", c.snr_threshold},
                          {"n_threshold", c.n_threshold},
                          {"snr_ratio", c.snr_ratio},
                          {"n_ratio", c.n_ratio},
                          {"satisfied", c.satisfied}});
  }
  j["thresholds"] = std::move(checks);
  return j.dump(2);
}

namespace {

json failures_to_json(const std::vector<TrialFailure>& failures) {
  json arr = json::array();
  for (const TrialFailure& f : failures) {
    arr.push_back(json{{"trial", f.trial}, {"message", f.message}});
  }
  return arr;
}

}  // namespace

void write_clt_report_json(const std::string& path, const ExperimentConfig& cfg,
                           const CltReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "clt-report";
  j["config"] = json::parse(experiment_config_to_json(cfg, "clt"));
  j["results"] = json{{"ks", report.ks},
                      {"mean", report.mean},
                      {"variance", report.variance},
                      {"raw_error_sd", report.raw_error_sd},
                      {"reference_se", report.reference_se},
                      {"completed", report.completed},
                      {"failure_count", static_cast<int>(report.failures.size())},
                      {"failures", failures_to_json(report.failures)}};
  j["wall_seconds"] = report.wall_seconds;
  save_text(path, j.dump(2) + "\n");
}

void write_clt_samples_csv(const std::string& path, const CltReport& report) {
  std::ostringstream out;
  out << "trial,statistic\n";
  for (std::size_t t = 0; t < report.statistics.size(); ++t) {
    if (!std::isfinite(report.statistics[t])) continue;
    out << t << "," << fmt_double(report.statistics[t]) << "\n";
  }
  save_text(path, out.str());
}

void write_coverage_report_json(const std::string& path, const ExperimentConfig& cfg,
                                const CoverageReport& report) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "coverage-report";
  j["config"] = json::parse(experiment_config_to_json(cfg, "coverage"));
  json alphas = json::array();
  for (const CoverageAlpha& pa : report.per_alpha) {
    alphas.push_back(json{{"alpha", pa.alpha},
                          {"nominal", 1.0 - pa.alpha},
                          {"mean_avgcov", pa.mean},
                          {"stddev", pa.stddev},
                          {"bar_lo", pa.bar_lo},
                          {"bar_hi", pa.bar_hi}});
  }
  j["results"] = json{{"per_alpha", std::move(alphas)},
                      {"completed", report.completed},
                      {"failure_count", static_cast<int>(report.failures.size())},
                      {"failures", failures_to_json(report.failures)}};
  j["wall_seconds"] = report.wall_seconds;
  save_text(path, j.dump(2) + "\n");
}

void write_coverage_samples_csv(const std::string& path, const CoverageReport& report) {
  std::ostringstream out;
  out << "trial,alpha,avgcov\n";
  if (!report.per_alpha.empty()) {
    const std::size_t trials = report.per_alpha.front().avgcov.size();
    for (std::size_t t = 0; t < trials; ++t) {
      for (const CoverageAlpha& pa : report.per_alpha) {
        if (!std::isfinite(pa.avgcov[t])) continue;
        out << t << "," << fmt_double(pa.alpha) << "," << fmt_double(pa.avgcov[t]) << "\n";
      }
    }
  }
  save_text(path, out.str());
}

}  // namespace tinfer
