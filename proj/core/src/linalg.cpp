#include "tinfer/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tinfer/errors.hpp"

namespace tinfer {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      const std::size_t brow = static_cast<std::size_t>(k) * b.cols;
      const std::size_t orow = static_cast<std::size_t>(i) * out.cols;
      for (int j = 0; j < b.cols; ++j) out.data[orow + j] += v * b.data[brow + j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_at_b: row counts differ");
  Matrix out(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const std::size_t arow = static_cast<std::size_t>(k) * a.cols;
    const std::size_t brow = static_cast<std::size_t>(k) * b.cols;
    for (int i = 0; i < a.cols; ++i) {
      const double v = a.data[arow + i];
      if (v == 0.0) continue;
      const std::size_t orow = static_cast<std::size_t>(i) * out.cols;
      for (int j = 0; j < b.cols; ++j) out.data[orow + j] += v * b.data[brow + j];
    }
  }
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_a_bt: column counts differ");
  Matrix out(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const std::size_t arow = static_cast<std::size_t>(i) * a.cols;
    for (int j = 0; j < b.rows; ++j) {
      const std::size_t brow = static_cast<std::size_t>(j) * b.cols;
      double sum = 0.0;
      for (int k = 0; k < a.cols; ++k) sum += a.data[arow + k] * b.data[brow + k];
      out(i, j) = sum;
    }
  }
  return out;
}

namespace {

double offdiag_frobenius_sq(const Matrix& a) {
  double sum = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return sum;
}

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite input");
  }
}

// Flip each column so its largest-magnitude entry is positive; ties resolved
// at the lowest row index.
void fix_column_signs(Matrix& u) {
  for (int c = 0; c < u.cols; ++c) {
    int arg = 0;
    double best = std::abs(u(0, c));
    for (int r = 1; r < u.rows; ++r) {
      const double v = std::abs(u(r, c));
      if (v > best) {
        best = v;
        arg = r;
      }
    }
    if (u(arg, c) < 0.0) {
      for (int r = 0; r < u.rows; ++r) u(r, c) = -u(r, c);
    }
  }
}

// Modified Gram-Schmidt pass over the columns, in order. Columns that vanish
// are replaced by the first canonical basis vector orthogonal to the rest.
void reorthonormalize_columns(Matrix& u) {
  for (int c = 0; c < u.cols; ++c) {
    for (int p = 0; p < c; ++p) {
      double dot = 0.0;
      for (int r = 0; r < u.rows; ++r) dot += u(r, c) * u(r, p);
      for (int r = 0; r < u.rows; ++r) u(r, c) -= dot * u(r, p);
    }
    double norm = 0.0;
    for (int r = 0; r < u.rows; ++r) norm += u(r, c) * u(r, c);
    norm = std::sqrt(norm);
    if (norm > 1e-300) {
      for (int r = 0; r < u.rows; ++r) u(r, c) /= norm;
      continue;
    }
    // Deterministic completion for a rank-deficient column.
    for (int k = 0; k < u.rows; ++k) {
      for (int r = 0; r < u.rows; ++r) u(r, c) = (r == k) ? 1.0 : 0.0;
      for (int p = 0; p < c; ++p) {
        double dot = u(k, p);
        for (int r = 0; r < u.rows; ++r) u(r, c) -= dot * u(r, p);
      }
      norm = 0.0;
      for (int r = 0; r < u.rows; ++r) norm += u(r, c) * u(r, c);
      norm = std::sqrt(norm);
      if (norm > 0.5) {
        for (int r = 0; r < u.rows; ++r) u(r, c) /= norm;
        break;
      }
    }
  }
}

}  // namespace

SymEig jacobi_eigh(const Matrix& sym) {
  if (sym.rows != sym.cols) throw std::invalid_argument("jacobi_eigh: matrix not square");
  check_finite(sym, "jacobi_eigh");
  const int n = sym.rows;
  Matrix a = sym;
  Matrix v = Matrix::identity(n);

  double input_norm = 0.0;
  for (double x : a.data) input_norm += x * x;
  input_norm = std::sqrt(input_norm);
  const double tol_sq = (1e-13 * input_norm) * (1e-13 * input_norm);

  for (int sweep = 0; sweep < 30 && offdiag_frobenius_sq(a) > tol_sq; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int lhs, int rhs) { return a(lhs, lhs) > a(rhs, rhs); });

  SymEig out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = Matrix(n, n);
  for (int c = 0; c < n; ++c) {
    const int src = order[static_cast<std::size_t>(c)];
    out.values[static_cast<std::size_t>(c)] = a(src, src);
    for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, src);
  }
  return out;
}

namespace {

// Left singular subspace from the Gram matrix of the smaller side; requesting
// k columns with k <= min(rows, cols). Adequate for subspaces at the top of
// the spectrum; thin_svd below uses one-sided Jacobi instead.
struct GramSvd {
  Matrix u;
  std::vector<double> sigma;
};

GramSvd gram_svd(const Matrix& m, int k) {
  const bool rows_small = m.rows <= m.cols;
  const Matrix gram = rows_small ? matmul_a_bt(m, m) : matmul_at_b(m, m);
  SymEig eig = jacobi_eigh(gram);

  const int small = gram.rows;
  std::vector<double> sigma(static_cast<std::size_t>(small));
  for (int i = 0; i < small; ++i) {
    sigma[static_cast<std::size_t>(i)] =
        std::sqrt(std::max(0.0, eig.values[static_cast<std::size_t>(i)]));
  }
  const double sigma_max = sigma.empty() ? 0.0 : sigma[0];
  const double tiny = sigma_max * 1e-14;

  GramSvd out;
  out.sigma.assign(sigma.begin(), sigma.begin() + k);

  Matrix small_vecs(small, k);
  for (int c = 0; c < k; ++c)
    for (int r = 0; r < small; ++r) small_vecs(r, c) = eig.vectors(r, c);

  if (rows_small) {
    out.u = std::move(small_vecs);
  } else {
    // Back-multiplication u_i = m v_i / sigma_i.
    out.u = Matrix(m.rows, k);
    for (int c = 0; c < k; ++c) {
      const double s = out.sigma[static_cast<std::size_t>(c)];
      if (s <= tiny) continue;
      for (int r = 0; r < m.rows; ++r) {
        double sum = 0.0;
        const std::size_t arow = static_cast<std::size_t>(r) * m.cols;
        for (int j = 0; j < m.cols; ++j) sum += m.data[arow + j] * small_vecs(j, c);
        out.u(r, c) = sum / s;
      }
    }
    reorthonormalize_columns(out.u);
  }
  return out;
}

}  // namespace

namespace {

// One-sided Jacobi (Hestenes) on a tall matrix b (rows >= cols): orthogonalize
// columns by plane rotations. Unlike the Gram route this resolves small
// singular values to machine precision, which the pseudo-inverse cutoff needs.
struct OneSided {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
};

OneSided one_sided_jacobi(Matrix b) {
  const int p = b.rows;
  const int q = b.cols;
  Matrix v = Matrix::identity(q);
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < q - 1; ++i) {
      for (int j = i + 1; j < q; ++j) {
        double aii = 0.0, ajj = 0.0, aij = 0.0;
        for (int r = 0; r < p; ++r) {
          aii += b(r, i) * b(r, i);
          ajj += b(r, j) * b(r, j);
          aij += b(r, i) * b(r, j);
        }
        if (aij == 0.0 || std::abs(aij) <= 1e-15 * std::sqrt(aii * ajj)) continue;
        rotated = true;
        const double theta = (ajj - aii) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int r = 0; r < p; ++r) {
          const double bi = b(r, i);
          const double bj = b(r, j);
          b(r, i) = c * bi - s * bj;
          b(r, j) = s * bi + c * bj;
        }
        for (int r = 0; r < q; ++r) {
          const double vi = v(r, i);
          const double vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(static_cast<std::size_t>(q), 0.0);
  for (int c = 0; c < q; ++c) {
    double sum = 0.0;
    for (int r = 0; r < p; ++r) sum += b(r, c) * b(r, c);
    norms[static_cast<std::size_t>(c)] = std::sqrt(sum);
  }
  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&norms](int a, int c) {
    return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(c)];
  });

  OneSided out;
  out.sigma.resize(static_cast<std::size_t>(q));
  out.u = Matrix(p, q);
  out.v = Matrix(q, q);
  for (int c = 0; c < q; ++c) {
    const int src = order[static_cast<std::size_t>(c)];
    const double s = norms[static_cast<std::size_t>(src)];
    out.sigma[static_cast<std::size_t>(c)] = s;
    if (s > 0.0) {
      for (int r = 0; r < p; ++r) out.u(r, c) = b(r, src) / s;
    }
    for (int r = 0; r < q; ++r) out.v(r, c) = v(r, src);
  }
  reorthonormalize_columns(out.u);  // completes any exactly-zero columns
  return out;
}

}  // namespace

TopSvd svd_top_r(const Matrix& m, int r) {
  if (r < 1 || r > std::min(m.rows, m.cols)) {
    throw std::invalid_argument("svd_top_r: rank " + std::to_string(r) +
                                " out of range for " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + " matrix");
  }
  check_finite(m, "svd_top_r");
  GramSvd g = gram_svd(m, r);
  fix_column_signs(g.u);
  return TopSvd{std::move(g.u), std::move(g.sigma)};
}

ThinSvd thin_svd(const Matrix& m) {
  check_finite(m, "thin_svd");
  OneSided g = m.rows >= m.cols ? one_sided_jacobi(m) : one_sided_jacobi(transpose(m));
  if (m.rows < m.cols) std::swap(g.u, g.v);
  // Sign convention applied to u, with v flipped in tandem so u s v^T is kept.
  for (int c = 0; c < g.u.cols; ++c) {
    int arg = 0;
    double best = std::abs(g.u(0, c));
    for (int r = 1; r < g.u.rows; ++r) {
      if (std::abs(g.u(r, c)) > best) {
        best = std::abs(g.u(r, c));
        arg = r;
      }
    }
    if (g.u(arg, c) < 0.0) {
      for (int r = 0; r < g.u.rows; ++r) g.u(r, c) = -g.u(r, c);
      for (int r = 0; r < g.v.rows; ++r) g.v(r, c) = -g.v(r, c);
    }
  }
  return ThinSvd{std::move(g.u), std::move(g.sigma), std::move(g.v)};
}

Matrix pseudo_inverse(const Matrix& m, double rel_cutoff, int* rank_out) {
  ThinSvd svd = thin_svd(m);
  const double cutoff = svd.sigma.empty() ? 0.0 : rel_cutoff * svd.sigma[0];
  int rank = 0;
  for (double s : svd.sigma) {
    if (s > cutoff && s > 0.0) ++rank;
  }
  if (rank_out != nullptr) *rank_out = rank;
  Matrix out(m.cols, m.rows);
  for (int k = 0; k < rank; ++k) {
    const double inv = 1.0 / svd.sigma[static_cast<std::size_t>(k)];
    for (int i = 0; i < m.cols; ++i) {
      const double vik = svd.v(i, k) * inv;
      if (vik == 0.0) continue;
      for (int j = 0; j < m.rows; ++j) out(i, j) += vik * svd.u(j, k);
    }
  }
  return out;
}

}  // namespace tinfer
