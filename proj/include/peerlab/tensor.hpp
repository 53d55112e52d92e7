#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "peerlab/error.hpp"

namespace peerlab {

// Dense row-major 2-D array of 64-bit floats. The only tensor rank in this
// library; image batches are stored flattened, one row per sample.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // length rows*cols

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool empty() const { return rows == 0 || cols == 0; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  std::string shape_str() const { return std::to_string(rows) + "x" + std::to_string(cols); }

  static Tensor identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

inline Tensor transpose(const Tensor& t) {
  Tensor out(t.cols, t.rows);
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) out(j, i) = t(i, j);
  return out;
}

// Standard matrix product with a fixed accumulation order: each output entry
// is a plain k-ascending dot product. b is transposed up front so both
// operands are walked with unit stride; this does not change the order.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " * " + b.shape_str());
  const Tensor bt = transpose(b);
  Tensor out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < b.cols; ++j) {
      const double* brow = bt.data.data() + j * bt.cols;
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      out(i, j) = acc;
    }
  }
  return out;
}

inline Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

inline Tensor scaled(const Tensor& t, double s) {
  Tensor out = t;
  for (double& v : out.data) v *= s;
  return out;
}

inline void add_in_place(Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline std::vector<double> column_means(const Tensor& t) {
  std::vector<double> mu(t.cols, 0.0);
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) mu[j] += t(i, j);
  for (double& m : mu) m /= static_cast<double>(t.rows);
  return mu;
}

// Population standard deviation per column.
inline std::vector<double> column_stds(const Tensor& t, const std::vector<double>& mu) {
  std::vector<double> sd(t.cols, 0.0);
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) {
      const double d = t(i, j) - mu[j];
      sd[j] += d * d;
    }
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(t.rows));
  return sd;
}

inline constexpr double kStandardizeEps = 1e-8;

// Per-column (z - mean) / (std + eps) with population std. eps only guards
// the denominator; a zero-variance column maps to zeros.
inline Tensor standardize_columns(const Tensor& z, double eps = kStandardizeEps) {
  if (z.rows < 2)
    throw DataError("standardize_columns: need at least 2 rows, got " + std::to_string(z.rows));
  const auto mu = column_means(z);
  const auto sd = column_stds(z, mu);
  Tensor out(z.rows, z.cols);
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = 0; j < z.cols; ++j) out(i, j) = (z(i, j) - mu[j]) / (sd[j] + eps);
  return out;
}

inline bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace peerlab
