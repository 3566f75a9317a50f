#pragma once

#include <optional>
#include <string>

#include "tinfer/harness.hpp"
#include "tinfer/inference.hpp"
#include "tinfer/regime.hpp"
#include "tinfer/sampling.hpp"
#include "tinfer/tensor.hpp"
#include "tinfer/tucker.hpp"

namespace tinfer {

// Tensor file: {"shape":[d1,...,dm], "data":[...]} with data in canonical
// linearization (last mode fastest).
DenseTensor read_tensor_json(const std::string& path);
void write_tensor_json(const std::string& path, const DenseTensor& t);

// Factorization file: {"core": <tensor>, "factors": [{"rows","cols","data"},...]}.
TuckerFactorization read_factorization_json(const std::string& path);
void write_factorization_json(const std::string& path, const TuckerFactorization& f);

// Reads either a tensor file or a factorization file (detected by the "core"
// key); factorizations are reconstructed.
DenseTensor read_tensor_or_factorization(const std::string& path);

// Observation file: CSV with header i1,...,im,y; 1-based indices, duplicates
// allowed. When no shape is supplied the dimensions default to the largest
// index seen per mode.
ObservationSet read_observations_csv(const std::string& path,
                                     const std::optional<Shape>& shape = std::nullopt);
void write_observations_csv(const std::string& path, const ObservationSet& obs);

// Linear-form file: CSV with header i1,...,im,w; 1-based indices.
LinearForm read_form_csv(const std::string& path, const Shape& shape);
void write_form_csv(const std::string& path, const LinearForm& form);

void write_inference_result_json(const std::string& path, const InferenceResult& result);

// Experiment configs are schema-versioned JSON; violations raise SchemaError
// listing every offending key.
ExperimentConfig read_experiment_config(const std::string& path, const std::string& expected_kind);
std::string experiment_config_to_json(const ExperimentConfig& cfg, const std::string& kind);

struct RegimeQuery {
  double snr = 0.0;
  double n = 0.0;
  Shape shape;
};
RegimeQuery read_regime_config(const std::string& path);

std::string regime_report_to_json(const RegimeQuery& query, const RegimeReport& report);

void write_clt_report_json(const std::string& path, const ExperimentConfig& cfg,
                           const CltReport& report);
void write_clt_samples_csv(const std::string& path, const CltReport& report);
void write_coverage_report_json(const std::string& path, const ExperimentConfig& cfg,
                                const CoverageReport& report);
void write_coverage_samples_csv(const std::string& path, const CoverageReport& report);

}  // namespace tinfer
