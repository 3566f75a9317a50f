#include "tinfer/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tinfer/errors.hpp"
#include "tinfer/linalg.hpp"

namespace tinfer {

LinearForm::LinearForm(Shape shape, std::vector<std::pair<std::int64_t, double>> entries)
    : shape_(std::move(shape)) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [off, w] : entries) {
    if (off < 0 || off >= shape_.num_entries()) {
      throw std::invalid_argument("LinearForm: index out of bounds");
    }
    if (!entries_.empty() && entries_.back().first == off) {
      entries_.back().second += w;
    } else {
      entries_.emplace_back(off, w);
    }
  }
  std::erase_if(entries_, [](const auto& e) { return e.second == 0.0; });
  if (entries_.empty()) {
    throw std::invalid_argument("LinearForm: needs at least one nonzero weight");
  }
  double sq = 0.0;
  for (const auto& [off, w] : entries_) {
    l1_ += std::abs(w);
    sq += w * w;
  }
  fro_ = std::sqrt(sq);
}

LinearForm LinearForm::from_dense(const DenseTensor& t) {
  std::vector<std::pair<std::int64_t, double>> entries;
  for (std::int64_t i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0) entries.emplace_back(i, t[i]);
  }
  return LinearForm(t.shape(), std::move(entries));
}

DenseTensor LinearForm::dense() const {
  DenseTensor t(shape_);
  for (const auto& [off, w] : entries_) t[off] = w;
  return t;
}

double LinearForm::value_of(const DenseTensor& t) const {
  if (!(t.shape() == shape_)) throw std::invalid_argument("LinearForm::value_of: shape mismatch");
  double sum = 0.0;
  for (const auto& [off, w] : entries_) sum += w * t[off];
  return sum;
}

double sigma_hat_sq(const ObservationSet& obs, const TuckerFactorization& init) {
  if (obs.count() < 1) throw std::invalid_argument("sigma_hat_sq: need at least one sample");
  if (!(obs.shape == init.ambient_shape())) {
    throw std::invalid_argument("sigma_hat_sq: shape mismatch");
  }
  const DenseTensor pred = reconstruct(init);
  double sum = 0.0;
  for (const Observation& s : obs.samples) {
    const double r = s.y - pred[s.offset];
    sum += r * r;
  }
  return sum / static_cast<double>(obs.count());
}

double plugin_se_homo(const TuckerFactorization& init, const LinearForm& form,
                      std::int64_t obs_count, double sigma_hat) {
  if (sigma_hat < 0.0) throw std::invalid_argument("plugin_se_homo: sigma_hat must be >= 0");
  if (obs_count < 1) throw std::invalid_argument("plugin_se_homo: need at least one sample");
  const DenseTensor projected = tangent_project_at(init, form.dense());
  const double dstar = static_cast<double>(form.shape().num_entries());
  return sigma_hat * frobenius_norm(projected) * std::sqrt(dstar / static_cast<double>(obs_count));
}

double s_hat_sq_hetero(const ObservationSet& obs, const TuckerFactorization& init,
                       const LinearForm& form) {
  if (obs.count() < 1) throw std::invalid_argument("s_hat_sq_hetero: need at least one sample");
  const DenseTensor pred = reconstruct(init);
  const DenseTensor projected = tangent_project_at(init, form.dense());
  double sum = 0.0;
  for (const Observation& s : obs.samples) {
    const double term = (s.y - pred[s.offset]) * projected[s.offset];
    sum += term * term;
  }
  const double dstar = static_cast<double>(obs.shape.num_entries());
  return dstar / static_cast<double>(obs.count()) * sum;
}

double test_statistic(double point, double truth_value, double se) {
  if (!(se > 0.0)) throw std::invalid_argument("test_statistic: se must be positive");
  return (point - truth_value) / se;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");

  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * 2.50662827463100050241576528481105 * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

std::pair<double, double> confidence_interval(double point, double se, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("confidence_interval: alpha must be in (0,1)");
  }
  if (se < 0.0) throw std::invalid_argument("confidence_interval: se must be >= 0");
  if (se == 0.0) return {point, point};
  const double z = normal_quantile(1.0 - alpha / 2.0);
  return {point - z * se, point + z * se};
}

Matrix joint_correlation(const TuckerFactorization& init, std::span<const LinearForm> forms) {
  if (forms.size() < 2) throw std::invalid_argument("joint_correlation: need at least two forms");
  const int k = static_cast<int>(forms.size());
  std::vector<DenseTensor> projections;
  projections.reserve(forms.size());
  for (int i = 0; i < k; ++i) {
    DenseTensor p = tangent_project_at(init, forms[static_cast<std::size_t>(i)].dense());
    if (frobenius_norm(p) == 0.0) {
      throw NumericError("joint_correlation: form " + std::to_string(i + 1) +
                         " has zero tangent projection (degenerate form)");
    }
    projections.push_back(std::move(p));
  }
  Matrix rho(k, k);
  std::vector<double> norms(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) norms[static_cast<std::size_t>(i)] = frobenius_norm(projections[static_cast<std::size_t>(i)]);
  for (int i = 0; i < k; ++i) {
    rho(i, i) = 1.0;
    for (int j = i + 1; j < k; ++j) {
      const double v = inner(projections[static_cast<std::size_t>(i)], projections[static_cast<std::size_t>(j)]) /
                       (norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)]);
      rho(i, j) = v;
      rho(j, i) = v;
    }
  }
  return rho;
}

double correlation_bound(const TuckerFactorization& init, const LinearForm& form1,
                         const LinearForm& form2) {
  const TuckerDiagnostics diag = diagnostics(init);
  double mu = 0.0;
  for (double v : diag.incoherence) mu = std::max(mu, v);
  const double rstar = static_cast<double>(init.rank().product());
  const Shape shape = init.ambient_shape();
  const double dstar = static_cast<double>(shape.num_entries());
  const double dmax = static_cast<double>(shape.max_dim());
  const int m = init.order();

  const DenseTensor d1 = form1.dense();
  const DenseTensor d2 = form2.dense();
  const double p1 = frobenius_norm(tangent_project_at(init, d1));
  const double p2 = frobenius_norm(tangent_project_at(init, d2));
  const double a1 = p1 * std::sqrt(dstar / dmax) / form1.frobenius();
  const double a2 = p2 * std::sqrt(dstar / dmax) / form2.frobenius();
  const double alpha = std::min(a1, a2);
  if (alpha == 0.0) {
    throw NumericError("correlation_bound: a form has zero tangent alignment");
  }

  // Cross term <M_j(I1)^T M_j(I2), P_{H_j}> with H_j the Kronecker projector
  // of the other modes, computed as <I1 x_{k!=j} P_{U_k}, I2>.
  double cross = 0.0;
  for (int j = 0; j < m; ++j) {
    DenseTensor proj = d1;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      const Matrix& u = init.factors[static_cast<std::size_t>(k)];
      proj = marginal_multiply(proj, k, transpose(u));
      proj = marginal_multiply(proj, k, u);
    }
    cross += std::abs(inner(proj, d2));
  }

  const double denom = dmax * alpha * alpha * form1.frobenius() * form2.frobenius();
  return (2.0 * std::pow(mu, m) * rstar * form1.l1() * form2.l1() + dstar * cross) / denom;
}

SharedInference infer_shared(const ObservationSet& obs, const TuckerFactorization& init,
                             std::span<const LinearForm> forms, const InferOptions& options,
                             std::span<const double> truth_values) {
  if (!truth_values.empty() && truth_values.size() != forms.size()) {
    throw std::invalid_argument("infer_shared: truth value count does not match form count");
  }
  SharedInference out;
  out.estimate = debias_power_iteration(obs, init);
  out.sigma_hat = std::sqrt(sigma_hat_sq(obs, init));

  const DenseTensor final_dense = reconstruct(out.estimate);
  const DenseTensor init_pred = reconstruct(init);
  const double dstar = static_cast<double>(obs.shape.num_entries());
  const double n = static_cast<double>(obs.count());
  const double scale_factor = std::sqrt(dstar / n);
  const Shape shape = obs.shape;
  const double dmax = static_cast<double>(shape.max_dim());

  out.forms.reserve(forms.size());
  for (std::size_t fi = 0; fi < forms.size(); ++fi) {
    const LinearForm& form = forms[fi];
    InferenceResult r;
    r.alpha = options.alpha;
    r.variance_mode = options.variance;
    r.point = form.value_of(final_dense);

    const DenseTensor projected = tangent_project_at(init, form.dense());
    r.proj_norm = frobenius_norm(projected);
    r.alignment = r.proj_norm * std::sqrt(dstar / dmax) / form.frobenius();

    if (options.variance == VarianceMode::kHomoskedastic) {
      r.sigma_hat = out.sigma_hat;
      r.se = out.sigma_hat * r.proj_norm * scale_factor;
    } else {
      double sum = 0.0;
      for (const Observation& s : obs.samples) {
        const double term = (s.y - init_pred[s.offset]) * projected[s.offset];
        sum += term * term;
      }
      const double s_hat = std::sqrt(dstar / n * sum);
      r.s_hat = s_hat;
      r.se = s_hat * scale_factor;
    }

    r.degenerate = !(r.se > 0.0);
    auto [lo, hi] = confidence_interval(r.point, r.se, options.alpha);
    r.ci_lo = lo;
    r.ci_hi = hi;
    if (!truth_values.empty()) {
      const double tv = truth_values[fi];
      if (!r.degenerate) r.statistic = (r.point - tv) / r.se;
    } else if (options.truth_value.has_value() && !r.degenerate) {
      r.statistic = (r.point - *options.truth_value) / r.se;
    }
    if (options.proj_norm_at_estimate) {
      r.proj_norm_at_estimate = frobenius_norm(tangent_project_at(out.estimate, form.dense()));
    }
    out.forms.push_back(std::move(r));
  }
  return out;
}

InferenceResult infer(const ObservationSet& obs, const TuckerFactorization& init,
                      const LinearForm& form, const InferOptions& options) {
  SharedInference shared = infer_shared(obs, init, std::span(&form, 1), options);
  return shared.forms.front();
}

}  // namespace tinfer
