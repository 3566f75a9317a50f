#pragma once

#include <vector>

#include "tinfer/tensor.hpp"

namespace tinfer {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
/// a^T * b without forming the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// a * b^T without forming the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Sweeps run until the off-diagonal Frobenius mass drops below
/// 1e-13 * ||A||_F (at most 30 sweeps). Pairs are sorted by descending
/// eigenvalue with ties broken by ascending pre-sort column index, so the
/// output is deterministic.
struct SymEig {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns match values
};
SymEig jacobi_eigh(const Matrix& sym);

/// Top-r left singular subspace of m, computed from the Gram matrix on the
/// smaller side (m m^T when rows <= cols, otherwise m^T m plus
/// back-multiplication). Columns are orthonormal; each is sign-fixed so its
/// largest-magnitude entry is positive (ties resolved at the lowest index).
struct TopSvd {
  Matrix u;                            // rows x r
  std::vector<double> singular_values; // length r, nonincreasing
};
TopSvd svd_top_r(const Matrix& m, int r);

/// Thin SVD m = u * diag(sigma) * v^T with rank = min(rows, cols) columns.
struct ThinSvd {
  Matrix u;
  std::vector<double> sigma;  // nonincreasing
  Matrix v;
};
ThinSvd thin_svd(const Matrix& m);

/// Moore-Penrose pseudo-inverse: singular values above rel_cutoff * sigma_max
/// are inverted, the rest dropped. rank_out (optional) receives the kept count.
Matrix pseudo_inverse(const Matrix& m, double rel_cutoff = 1e-12, int* rank_out = nullptr);

}  // namespace tinfer
