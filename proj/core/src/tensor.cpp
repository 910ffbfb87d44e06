// Copyright 2026 The musecap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "musecap/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "musecap/errors.hpp"

namespace musecap {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw DimensionError("tensor dimension must be positive");
  }
  data_.assign(shape_size(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw DimensionError("tensor dimension must be positive");
  }
  if (data_.size() != shape_size(shape_)) {
    throw DimensionError("tensor data size " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on non-matrix tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on non-matrix tensor");
  return shape_[1];
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const { return musecap::all_finite(data_); }

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": expected size " +
                         std::to_string(b) + ", got " + std::to_string(a));
  }
}

namespace linalg {

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void gemv_add(const Tensor& w, std::span<const double> x,
              std::span<double> y) {
  const std::size_t rows = w.rows(), cols = w.cols();
  require_same_size(x.size(), cols, "gemv input");
  require_same_size(y.size(), rows, "gemv output");
  const double* p = w.values().data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += p[c] * x[c];
    y[r] += s;
  }
}

void gemv_t_add(const Tensor& w, std::span<const double> x,
                std::span<double> y) {
  const std::size_t rows = w.rows(), cols = w.cols();
  require_same_size(x.size(), rows, "gemv_t input");
  require_same_size(y.size(), cols, "gemv_t output");
  const double* p = w.values().data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    const double xr = x[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += p[c] * xr;
  }
}

void outer_add(std::span<const double> a, std::span<const double> b,
               Tensor& w) {
  const std::size_t rows = w.rows(), cols = w.cols();
  require_same_size(a.size(), rows, "outer rows");
  require_same_size(b.size(), cols, "outer cols");
  double* p = w.values().data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    const double ar = a[r];
    for (std::size_t c = 0; c < cols; ++c) p[c] += ar * b[c];
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void add_to(std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "add");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += x[i];
}

}  // namespace linalg

}  // namespace musecap
