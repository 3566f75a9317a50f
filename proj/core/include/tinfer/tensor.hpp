#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tinfer {

/// Dimensions of an m-way tensor, m >= 2. Indices are 0-based throughout the
/// library; 1-based indices appear only in file formats and error messages.
///
/// The canonical linearization is row-major with the LAST mode varying
/// fastest: offset(i_1,...,i_m) = ((i_1*d_2 + i_2)*d_3 + ...) + i_m.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> dims);

  int order() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
  const std::vector<int>& dims() const { return dims_; }

  /// Total entry count d* = prod(d_j).
  std::int64_t num_entries() const { return total_; }
  /// d* / d_mode.
  std::int64_t codim(int mode) const;
  int max_dim() const;
  int min_dim() const;

  std::int64_t offset_of(std::span<const int> index) const;
  void index_of(std::int64_t offset, std::span<int> index_out) const;

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::int64_t total_ = 0;
};

/// Dense m-way tensor of doubles in canonical linearization.
/// Treat instances as immutable once fully constructed; every operation in
/// this library is a pure function over its inputs.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape);
  DenseTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double operator[](std::int64_t offset) const {
    return data_[static_cast<std::size_t>(offset)];
  }
  double& operator[](std::int64_t offset) {
    return data_[static_cast<std::size_t>(offset)];
  }
  double at(std::span<const int> index) const {
    return data_[static_cast<std::size_t>(shape_.offset_of(index))];
  }
  double& at(std::span<const int> index) {
    return data_[static_cast<std::size_t>(shape_.offset_of(index))];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // rows*cols, row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  static Matrix identity(int n);
};

/// Mode-j unfolding: a d_j x d_{-j} matrix. Column index enumerates the
/// remaining modes in their original order with the last one varying fastest,
/// so for m=3 the mode-0 unfolding has column index i_1*d_2 + i_2.
Matrix unfold(const DenseTensor& t, int mode);

/// Inverse of unfold: exact round trip fold(unfold(t, j), j, t.shape()) == t.
DenseTensor fold(const Matrix& m, int mode, const Shape& shape);

/// Marginal (mode-j) product t x_j a. Requires a.cols == d_j; the result
/// replaces d_j with a.rows and satisfies unfold(result, j) == a * unfold(t, j).
DenseTensor marginal_multiply(const DenseTensor& t, int mode, const Matrix& a);

double inner(const DenseTensor& a, const DenseTensor& b);
double frobenius_norm(const DenseTensor& t);
double l1_norm(const DenseTensor& t);
double linf_norm(const DenseTensor& t);

/// Largest row-wise l2 norm of a matrix.
double matrix_two_inf(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// Outer product of m vectors: result[i_1,...,i_m] = prod_j v_j[i_j].
DenseTensor outer(std::span<const std::vector<double>> vectors);

/// Entrywise product; shapes must match.
DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b);

DenseTensor add(const DenseTensor& a, const DenseTensor& b);
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);
DenseTensor scale(const DenseTensor& t, double factor);

/// Human-readable 1-based index, e.g. "(3,1,2)", for error messages.
std::string format_index_1based(const Shape& shape, std::int64_t offset);

}  // namespace tinfer
