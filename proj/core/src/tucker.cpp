#include "tinfer/tucker.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tinfer/errors.hpp"

namespace tinfer {

MultilinearRank::MultilinearRank(std::vector<int> r) : ranks(std::move(r)) {
  if (ranks.size() < 2) throw std::invalid_argument("MultilinearRank: order must be >= 2");
  for (int v : ranks) {
    if (v < 1) throw std::invalid_argument("MultilinearRank: every rank must be >= 1");
  }
}

std::int64_t MultilinearRank::product() const {
  std::int64_t p = 1;
  for (int v : ranks) p *= v;
  return p;
}

void MultilinearRank::validate_for(const Shape& shape) const {
  if (order() != shape.order()) {
    throw std::invalid_argument("MultilinearRank: order mismatch with shape");
  }
  for (int j = 0; j < order(); ++j) {
    if (rank(j) > shape.dim(j)) {
      throw std::invalid_argument("MultilinearRank: rank " + std::to_string(rank(j)) +
                                  " exceeds dimension " + std::to_string(shape.dim(j)) +
                                  " in mode " + std::to_string(j + 1));
    }
  }
}

Shape TuckerFactorization::ambient_shape() const {
  std::vector<int> dims;
  dims.reserve(factors.size());
  for (const Matrix& u : factors) dims.push_back(u.rows);
  return Shape(dims);
}

MultilinearRank TuckerFactorization::rank() const {
  std::vector<int> r;
  r.reserve(factors.size());
  for (const Matrix& u : factors) r.push_back(u.cols);
  return MultilinearRank(r);
}

void validate(const TuckerFactorization& f) {
  if (f.order() < 2) throw std::invalid_argument("TuckerFactorization: order must be >= 2");
  if (f.core.shape().order() != f.order()) {
    throw std::invalid_argument("TuckerFactorization: core order does not match factor count");
  }
  for (int j = 0; j < f.order(); ++j) {
    const Matrix& u = f.factors[static_cast<std::size_t>(j)];
    if (u.cols != f.core.shape().dim(j)) {
      throw std::invalid_argument("TuckerFactorization: factor " + std::to_string(j + 1) +
                                  " column count does not match core dimension");
    }
    if (u.cols > u.rows) {
      throw std::invalid_argument("TuckerFactorization: factor " + std::to_string(j + 1) +
                                  " has more columns than rows");
    }
    Matrix gram = matmul_at_b(u, u);
    for (int a = 0; a < gram.rows; ++a) {
      for (int b = 0; b < gram.cols; ++b) {
        const double want = a == b ? 1.0 : 0.0;
        if (std::abs(gram(a, b) - want) > 1e-10) {
          throw NumericError("TuckerFactorization: factor " + std::to_string(j + 1) +
                             " is not orthonormal");
        }
      }
    }
  }
}

DenseTensor reconstruct(const TuckerFactorization& f) {
  DenseTensor t = f.core;
  for (int j = 0; j < f.order(); ++j) {
    t = marginal_multiply(t, j, f.factors[static_cast<std::size_t>(j)]);
  }
  return t;
}

double reconstruct_entry(const TuckerFactorization& f, std::span<const int> index) {
  const int m = f.order();
  const Shape& cshape = f.core.shape();
  std::vector<int> a(static_cast<std::size_t>(m), 0);
  double sum = 0.0;
  for (std::int64_t off = 0; off < f.core.size(); ++off) {
    cshape.index_of(off, a);
    double v = f.core[off];
    if (v == 0.0) continue;
    for (int j = 0; j < m; ++j) {
      v *= f.factors[static_cast<std::size_t>(j)](index[static_cast<std::size_t>(j)],
                                                  a[static_cast<std::size_t>(j)]);
    }
    sum += v;
  }
  return sum;
}

double reconstruct_entry_at_offset(const TuckerFactorization& f, std::int64_t offset) {
  std::vector<int> idx(static_cast<std::size_t>(f.order()), 0);
  f.ambient_shape().index_of(offset, idx);
  return reconstruct_entry(f, idx);
}

TuckerFactorization hosvd(const DenseTensor& t, const MultilinearRank& r) {
  r.validate_for(t.shape());
  TuckerFactorization f;
  f.factors.reserve(static_cast<std::size_t>(r.order()));
  for (int j = 0; j < r.order(); ++j) {
    TopSvd svd = svd_top_r(unfold(t, j), r.rank(j));
    f.factors.push_back(std::move(svd.u));
  }
  DenseTensor core = t;
  for (int j = 0; j < r.order(); ++j) {
    core = marginal_multiply(core, j, transpose(f.factors[static_cast<std::size_t>(j)]));
  }
  f.core = std::move(core);
  return f;
}

DenseTensor project_multilinear(const DenseTensor& t, std::span<const Matrix> factors) {
  if (static_cast<int>(factors.size()) != t.shape().order()) {
    throw std::invalid_argument("project_multilinear: factor count does not match order");
  }
  DenseTensor out = t;
  for (int j = 0; j < t.shape().order(); ++j) {
    const Matrix& u = factors[static_cast<std::size_t>(j)];
    if (u.rows != t.shape().dim(j)) {
      throw std::invalid_argument("project_multilinear: factor " + std::to_string(j + 1) +
                                  " row count does not match mode dimension");
    }
    out = marginal_multiply(out, j, transpose(u));
    out = marginal_multiply(out, j, u);
  }
  return out;
}

TuckerDiagnostics diagnostics(const TuckerFactorization& f) {
  TuckerDiagnostics d;
  const int m = f.order();
  d.incoherence.resize(static_cast<std::size_t>(m));
  std::int64_t rank_sum = 0;
  for (int j = 0; j < m; ++j) {
    const Matrix& u = f.factors[static_cast<std::size_t>(j)];
    const double two_inf = matrix_two_inf(u);
    d.incoherence[static_cast<std::size_t>(j)] =
        static_cast<double>(u.rows) * two_inf * two_inf / static_cast<double>(u.cols);
    rank_sum += static_cast<std::int64_t>(u.cols) * u.rows -
                static_cast<std::int64_t>(u.cols) * u.cols;
  }
  d.dof = f.rank().product() + rank_sum;

  if (frobenius_norm(f.core) == 0.0) {
    throw NumericError("diagnostics: zero core tensor, condition number undefined");
  }
  // With orthonormal factors the unfoldings of the reconstruction share the
  // nonzero spectrum of the core unfoldings, so the singular values are read
  // off the small side.
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  for (int j = 0; j < m; ++j) {
    ThinSvd svd = thin_svd(unfold(f.core, j));
    const int r = f.core.shape().dim(j);
    const double top = svd.sigma.front();
    const double bottom = svd.sigma[static_cast<std::size_t>(r - 1)];
    if (j == 0 || bottom < lambda_min) lambda_min = bottom;
    if (j == 0 || top > lambda_max) lambda_max = top;
  }
  d.lambda_min = lambda_min;
  d.lambda_max = lambda_max;
  if (lambda_min <= 0.0) {
    throw NumericError("diagnostics: rank-deficient core, condition number undefined");
  }
  d.kappa = lambda_max / lambda_min;
  return d;
}

}  // namespace tinfer
