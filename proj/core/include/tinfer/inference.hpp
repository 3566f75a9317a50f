#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tinfer/estimators.hpp"
#include "tinfer/sampling.hpp"
#include "tinfer/tensor.hpp"
#include "tinfer/tucker.hpp"

namespace tinfer {

/// Indexing tensor for a linear form <T, I>. Stored sparse (offset, weight)
/// with duplicates accumulated; densify on demand.
class LinearForm {
 public:
  LinearForm(Shape shape, std::vector<std::pair<std::int64_t, double>> entries);

  static LinearForm from_dense(const DenseTensor& t);

  const Shape& shape() const { return shape_; }
  const std::vector<std::pair<std::int64_t, double>>& entries() const { return entries_; }

  double l1() const { return l1_; }
  double frobenius() const { return fro_; }
  std::int64_t support_size() const { return static_cast<std::int64_t>(entries_.size()); }

  DenseTensor dense() const;
  /// <t, I> as a sparse dot product.
  double value_of(const DenseTensor& t) const;

 private:
  Shape shape_;
  std::vector<std::pair<std::int64_t, double>> entries_;  // sorted by offset, nonzero
  double l1_ = 0.0;
  double fro_ = 0.0;
};

enum class VarianceMode { kHomoskedastic, kHeteroskedastic };

struct InferenceResult {
  double point = 0.0;
  double se = 0.0;
  std::optional<double> statistic;  // present when a truth value was supplied
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
  VarianceMode variance_mode = VarianceMode::kHomoskedastic;
  /// se == 0 (zero residuals or a form orthogonal to the tangent space);
  /// the interval degenerates to the point.
  bool degenerate = false;
  double proj_norm = 0.0;   // ||P_That(I)||_F at the initialization
  double alignment = 0.0;   // proj_norm * sqrt(d*/max dim) / ||I||_F
  std::optional<double> sigma_hat;  // homoskedastic mode
  std::optional<double> s_hat;      // heteroskedastic mode
  std::optional<double> proj_norm_at_estimate;  // debug comparison only
};

struct JointInferenceResult {
  std::vector<InferenceResult> results;
  Matrix correlation;
};

/// Mean squared residual of the observations against the initialization.
double sigma_hat_sq(const ObservationSet& obs, const TuckerFactorization& init);

/// sigma_hat * ||P_That(I)||_F * sqrt(d*/n).
double plugin_se_homo(const TuckerFactorization& init, const LinearForm& form,
                      std::int64_t obs_count, double sigma_hat);

/// Heteroskedastic variance estimate
/// (d*/n) sum_i [(y_i - pred_i) * P_That(I)[cell_i]]^2.
double s_hat_sq_hetero(const ObservationSet& obs, const TuckerFactorization& init,
                       const LinearForm& form);

/// (point - truth_value) / se; throws on se == 0.
double test_statistic(double point, double truth_value, double se);

/// Two-sided interval point -/+ z_{alpha/2} * se.
std::pair<double, double> confidence_interval(double point, double se, double alpha);

/// Inverse standard normal CDF (Acklam rational approximation plus one
/// Halley refinement; absolute error below 1e-9).
double normal_quantile(double p);
double normal_cdf(double x);

/// Gram matrix of normalized tangent projections of the forms.
Matrix joint_correlation(const TuckerFactorization& init, std::span<const LinearForm> forms);

/// Computable upper bound on |rho(I1, I2)| from the incoherence of the
/// factors and the empirical alignment of the two forms.
double correlation_bound(const TuckerFactorization& init, const LinearForm& form1,
                         const LinearForm& form2);

struct InferOptions {
  double alpha = 0.05;
  VarianceMode variance = VarianceMode::kHomoskedastic;
  std::optional<double> truth_value;
  /// Also report ||P(I)||_F recomputed at the final estimate (diagnostic
  /// only; the standard error always uses the initialization tangent space).
  bool proj_norm_at_estimate = false;
};

InferenceResult infer(const ObservationSet& obs, const TuckerFactorization& init,
                      const LinearForm& form, const InferOptions& options);

/// Batched inference sharing a single debias + power-iteration pass.
struct SharedInference {
  TuckerFactorization estimate;
  double sigma_hat = 0.0;
  std::vector<InferenceResult> forms;  // point/se/proj/alignment filled; CI at options.alpha
};
SharedInference infer_shared(const ObservationSet& obs, const TuckerFactorization& init,
                             std::span<const LinearForm> forms, const InferOptions& options,
                             std::span<const double> truth_values = {});

}  // namespace tinfer
