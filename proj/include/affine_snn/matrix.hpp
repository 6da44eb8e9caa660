#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "affine_snn/error.hpp"

namespace affine_snn {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DimensionMismatch("matrix data size does not match shape");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum);
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// x -> weights * x + bias.
struct AffineMap {
  Matrix weights;
  std::vector<double> bias;

  AffineMap() = default;
  AffineMap(Matrix w, std::vector<double> b) : weights(std::move(w)), bias(std::move(b)) {
    if (bias.size() != weights.rows()) throw DimensionMismatch("affine map bias length must equal matrix rows");
  }

  static AffineMap identity(std::size_t n) { return {Matrix::identity(n), std::vector<double>(n, 0.0)}; }

  std::size_t input_dim() const noexcept { return weights.cols(); }
  std::size_t output_dim() const noexcept { return weights.rows(); }

  void apply(std::span<const double> x, std::span<double> out) const {
    if (x.size() != input_dim() || out.size() != output_dim())
      throw DimensionMismatch("affine map applied to vector of wrong length");
    for (std::size_t r = 0; r < weights.rows(); ++r) {
      const auto w = weights.row(r);
      double acc = bias[r];
      for (std::size_t c = 0; c < w.size(); ++c) acc += w[c] * x[c];
      out[r] = acc;
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(output_dim());
    apply(x, out);
    return out;
  }

  bool operator==(const AffineMap&) const = default;
};

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace affine_snn
