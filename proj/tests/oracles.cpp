#include "oracles.hpp"

#include <cmath>

namespace oracles {

using tinfer::DenseTensor;
using tinfer::Matrix;
using tinfer::MultilinearRank;
using tinfer::Shape;
using tinfer::TuckerFactorization;

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
  return out;
}

Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

tinfer::Matrix oracle_unfold(const DenseTensor& t, int mode) {
  const Shape& shape = t.shape();
  const int m = shape.order();
  Matrix out(shape.dim(mode), static_cast<int>(shape.codim(mode)));
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  for (std::int64_t off = 0; off < t.size(); ++off) {
    shape.index_of(off, idx);
    // Column index: remaining modes in original order, last fastest.
    std::int64_t col = 0;
    for (int j = 0; j < m; ++j) {
      if (j == mode) continue;
      col = col * shape.dim(j) + idx[static_cast<std::size_t>(j)];
    }
    out(idx[static_cast<std::size_t>(mode)], static_cast<int>(col)) = t[off];
  }
  return out;
}

Eigen::MatrixXd oracle_top_r_projector(const Matrix& m, int r) {
  const Eigen::MatrixXd a = to_eigen(m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  return u * u.transpose();
}

DenseTensor oracle_reconstruct(const TuckerFactorization& f) {
  const Shape ambient = f.ambient_shape();
  const Shape& cshape = f.core.shape();
  const int m = ambient.order();
  DenseTensor out(ambient);
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  std::vector<int> a(static_cast<std::size_t>(m), 0);
  for (std::int64_t off = 0; off < out.size(); ++off) {
    ambient.index_of(off, idx);
    double sum = 0.0;
    for (std::int64_t coff = 0; coff < f.core.size(); ++coff) {
      cshape.index_of(coff, a);
      double v = f.core[coff];
      for (int j = 0; j < m; ++j) {
        v *= f.factors[static_cast<std::size_t>(j)](idx[static_cast<std::size_t>(j)],
                                                    a[static_cast<std::size_t>(j)]);
      }
      sum += v;
    }
    out[off] = sum;
  }
  return out;
}

namespace {

// Orthonormal basis of the orthogonal complement of U's column space.
Eigen::MatrixXd complement_basis(const Matrix& u) {
  const Eigen::MatrixXd ue = to_eigen(u);
  const Eigen::Index d = ue.rows();
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(d, d) - ue * ue.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(full, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(d - ue.cols());
}

}  // namespace

Eigen::MatrixXd tangent_basis(const TuckerFactorization& f) {
  const Shape ambient = f.ambient_shape();
  const int m = ambient.order();
  const std::int64_t dstar = ambient.num_entries();
  const MultilinearRank rank = f.rank();

  std::int64_t cols = rank.product();
  for (int j = 0; j < m; ++j) {
    cols += static_cast<std::int64_t>(rank.rank(j)) * (ambient.dim(j) - rank.rank(j));
  }
  Eigen::MatrixXd basis(dstar, cols);
  Eigen::Index col = 0;

  // Core variations: e_a x_1 U_1 ... x_m U_m.
  for (std::int64_t a = 0; a < f.core.size(); ++a) {
    DenseTensor e(f.core.shape());
    e[a] = 1.0;
    TuckerFactorization g{e, f.factors};
    const DenseTensor t = oracle_reconstruct(g);
    for (std::int64_t i = 0; i < dstar; ++i) basis(i, col) = t[i];
    ++col;
  }

  // Factor variations: C x_{k != j} U_k x_j (u_perp e_q^T).
  for (int j = 0; j < m; ++j) {
    const Eigen::MatrixXd comp = complement_basis(f.factors[static_cast<std::size_t>(j)]);
    for (Eigen::Index p = 0; p < comp.cols(); ++p) {
      for (int q = 0; q < rank.rank(j); ++q) {
        Matrix w(ambient.dim(j), rank.rank(j));
        for (int row = 0; row < ambient.dim(j); ++row) w(row, q) = comp(row, p);
        TuckerFactorization g = f;
        g.factors[static_cast<std::size_t>(j)] = w;
        const DenseTensor t = oracle_reconstruct(g);
        for (std::int64_t i = 0; i < dstar; ++i) basis(i, col) = t[i];
        ++col;
      }
    }
  }
  return basis;
}

DenseTensor oracle_tangent_project(const TuckerFactorization& f, const DenseTensor& g,
                                   Eigen::Index* basis_rank) {
  const Eigen::MatrixXd basis = tangent_basis(f);
  Eigen::VectorXd rhs(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) rhs(i) = g[i];
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(basis);
  if (basis_rank != nullptr) *basis_rank = cod.rank();
  const Eigen::VectorXd coef = cod.solve(rhs);
  const Eigen::VectorXd proj = basis * coef;
  DenseTensor out(g.shape());
  for (std::int64_t i = 0; i < g.size(); ++i) out[i] = proj(i);
  return out;
}

DenseTensor random_tensor(const Shape& shape, std::mt19937& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseTensor t(shape);
  for (double& v : t.data()) v = normal(gen);
  return t;
}

Matrix random_orthonormal(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = normal(gen);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return from_eigen(q);
}

TuckerFactorization random_factorization(const Shape& shape, const MultilinearRank& rank,
                                         std::mt19937& gen) {
  TuckerFactorization f;
  for (int j = 0; j < shape.order(); ++j) {
    f.factors.push_back(random_orthonormal(shape.dim(j), rank.rank(j), gen));
  }
  f.core = random_tensor(Shape(std::vector<int>(rank.ranks.begin(), rank.ranks.end())), gen);
  return f;
}

double rel_error(const DenseTensor& got, const DenseTensor& want) {
  return tinfer::frobenius_norm(tinfer::subtract(got, want)) /
         std::max(tinfer::frobenius_norm(want), 1e-300);
}

}  // namespace oracles
