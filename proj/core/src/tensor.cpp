#include "tinfer/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace tinfer {

namespace {

std::string mode_message(const char* what, int mode, int order) {
  // Modes are reported 1-based, matching the file formats.
  return std::string(what) + ": mode " + std::to_string(mode + 1) +
         " out of range for order-" + std::to_string(order) + " tensor";
}

}  // namespace

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) {
    throw std::invalid_argument("Shape: tensor order must be at least 2");
  }
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("Shape: all dimensions must be >= 1");
    if (total_ > (std::int64_t{1} << 56) / d) {
      throw std::invalid_argument("Shape: entry count overflows index range");
    }
    total_ *= d;
  }
}

std::int64_t Shape::codim(int mode) const {
  if (mode < 0 || mode >= order()) throw std::invalid_argument(mode_message("Shape::codim", mode, order()));
  return total_ / dims_[static_cast<std::size_t>(mode)];
}

int Shape::max_dim() const {
  int best = dims_[0];
  for (int d : dims_) best = d > best ? d : best;
  return best;
}

int Shape::min_dim() const {
  int best = dims_[0];
  for (int d : dims_) best = d < best ? d : best;
  return best;
}

std::int64_t Shape::offset_of(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order()) {
    throw std::invalid_argument("Shape::offset_of: index order mismatch");
  }
  std::int64_t off = 0;
  for (int j = 0; j < order(); ++j) {
    int i = index[static_cast<std::size_t>(j)];
    if (i < 0 || i >= dims_[static_cast<std::size_t>(j)]) {
      throw std::invalid_argument("Shape::offset_of: index component " + std::to_string(j + 1) +
                                  " out of bounds");
    }
    off = off * dims_[static_cast<std::size_t>(j)] + i;
  }
  return off;
}

void Shape::index_of(std::int64_t offset, std::span<int> index_out) const {
  for (int j = order() - 1; j >= 0; --j) {
    int d = dims_[static_cast<std::size_t>(j)];
    index_out[static_cast<std::size_t>(j)] = static_cast<int>(offset % d);
    offset /= d;
  }
}

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_.num_entries()), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != shape_.num_entries()) {
    throw std::invalid_argument("DenseTensor: data length does not match shape");
  }
}

bool DenseTensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

// Every mode-wise loop below uses the same decomposition of the canonical
// offset: offset = a*(d_mode*inner) + i*inner + b, where `a` runs over the
// modes before `mode` and `b` over the modes after it. The unfolding column
// index is then a*inner + b, which keeps the last remaining mode fastest.
namespace {

struct ModeSplit {
  std::int64_t outer;  // product of dims before mode
  std::int64_t inner;  // product of dims after mode
  int dim;
};

ModeSplit split(const Shape& shape, int mode, const char* what) {
  if (mode < 0 || mode >= shape.order()) {
    throw std::invalid_argument(mode_message(what, mode, shape.order()));
  }
  ModeSplit s{1, 1, shape.dim(mode)};
  for (int j = 0; j < mode; ++j) s.outer *= shape.dim(j);
  for (int j = mode + 1; j < shape.order(); ++j) s.inner *= shape.dim(j);
  return s;
}

}  // namespace

Matrix unfold(const DenseTensor& t, int mode) {
  const ModeSplit s = split(t.shape(), mode, "unfold");
  Matrix m(s.dim, static_cast<int>(s.outer * s.inner));
  const std::int64_t cols = s.outer * s.inner;
  for (std::int64_t a = 0; a < s.outer; ++a) {
    for (int i = 0; i < s.dim; ++i) {
      const std::int64_t src = (a * s.dim + i) * s.inner;
      const std::int64_t dst = i * cols + a * s.inner;
      for (std::int64_t b = 0; b < s.inner; ++b) {
        m.data[static_cast<std::size_t>(dst + b)] = t[src + b];
      }
    }
  }
  return m;
}

DenseTensor fold(const Matrix& m, int mode, const Shape& shape) {
  const ModeSplit s = split(shape, mode, "fold");
  if (m.rows != s.dim || static_cast<std::int64_t>(m.cols) != s.outer * s.inner) {
    throw std::invalid_argument("fold: matrix dimensions do not match target shape");
  }
  DenseTensor t(shape);
  const std::int64_t cols = s.outer * s.inner;
  for (std::int64_t a = 0; a < s.outer; ++a) {
    for (int i = 0; i < s.dim; ++i) {
      const std::int64_t dst = (a * s.dim + i) * s.inner;
      const std::int64_t src = i * cols + a * s.inner;
      for (std::int64_t b = 0; b < s.inner; ++b) {
        t[dst + b] = m.data[static_cast<std::size_t>(src + b)];
      }
    }
  }
  return t;
}

DenseTensor marginal_multiply(const DenseTensor& t, int mode, const Matrix& a) {
  const ModeSplit s = split(t.shape(), mode, "marginal_multiply");
  if (a.cols != s.dim) {
    throw std::invalid_argument("marginal_multiply: matrix has " + std::to_string(a.cols) +
                                " columns, mode " + std::to_string(mode + 1) + " has dimension " +
                                std::to_string(s.dim));
  }
  std::vector<int> dims = t.shape().dims();
  dims[static_cast<std::size_t>(mode)] = a.rows;
  DenseTensor out{Shape(dims)};
  for (std::int64_t blk = 0; blk < s.outer; ++blk) {
    const std::int64_t src_base = blk * s.dim * s.inner;
    const std::int64_t dst_base = blk * a.rows * s.inner;
    for (int r = 0; r < a.rows; ++r) {
      const std::int64_t dst = dst_base + r * s.inner;
      for (int c = 0; c < s.dim; ++c) {
        const double w = a(r, c);
        if (w == 0.0) continue;
        const std::int64_t src = src_base + c * s.inner;
        for (std::int64_t b = 0; b < s.inner; ++b) {
          out[dst + b] += w * t[src + b];
        }
      }
    }
  }
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (!(a.shape() == b.shape())) {
    throw std::invalid_argument("inner: shape mismatch");
  }
  double sum = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double frobenius_norm(const DenseTensor& t) {
  double sum = 0.0;
  for (double v : t.data()) sum += v * v;
  return std::sqrt(sum);
}

double l1_norm(const DenseTensor& t) {
  double sum = 0.0;
  for (double v : t.data()) sum += std::abs(v);
  return sum;
}

double linf_norm(const DenseTensor& t) {
  double best = 0.0;
  for (double v : t.data()) best = std::max(best, std::abs(v));
  return best;
}

double matrix_two_inf(const Matrix& m) {
  double best = 0.0;
  for (int r = 0; r < m.rows; ++r) {
    double row = 0.0;
    for (int c = 0; c < m.cols; ++c) row += m(r, c) * m(r, c);
    best = std::max(best, row);
  }
  return std::sqrt(best);
}

double frobenius_norm(const Matrix& m) {
  double sum = 0.0;
  for (double v : m.data) sum += v * v;
  return std::sqrt(sum);
}

DenseTensor outer(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw std::invalid_argument("outer: need at least two vectors");
  std::vector<int> dims;
  dims.reserve(vectors.size());
  for (const auto& v : vectors) dims.push_back(static_cast<int>(v.size()));
  DenseTensor out{Shape(dims)};
  // Last mode fastest: fill by recursion over the flat offset.
  const int m = static_cast<int>(vectors.size());
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  for (std::int64_t off = 0; off < out.size(); ++off) {
    out.shape().index_of(off, idx);
    double v = 1.0;
    for (int j = 0; j < m; ++j) v *= vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    out[off] = v;
  }
  return out;
}

DenseTensor hadamard(const DenseTensor& a, const DenseTensor& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("hadamard: shape mismatch");
  DenseTensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("add: shape mismatch");
  DenseTensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  if (!(a.shape() == b.shape())) throw std::invalid_argument("subtract: shape mismatch");
  DenseTensor out(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

DenseTensor scale(const DenseTensor& t, double factor) {
  DenseTensor out(t.shape());
  for (std::int64_t i = 0; i < t.size(); ++i) out[i] = factor * t[i];
  return out;
}

std::string format_index_1based(const Shape& shape, std::int64_t offset) {
  std::vector<int> idx(static_cast<std::size_t>(shape.order()), 0);
  shape.index_of(offset, idx);
  std::string s = "(";
  for (int j = 0; j < shape.order(); ++j) {
    if (j > 0) s += ",";
    s += std::to_string(idx[static_cast<std::size_t>(j)] + 1);
  }
  s += ")";
  return s;
}

}  // namespace tinfer
