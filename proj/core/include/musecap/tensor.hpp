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

#ifndef MUSECAP_TENSOR_HPP_
#define MUSECAP_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace musecap {

using Shape = std::vector<std::size_t>;

// Dense row-major array of doubles. Rank-1 tensors are vectors, rank-2 are
// matrices indexed (row, col).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Matrix helpers; require rank 2.
  std::size_t rows() const;
  std::size_t cols() const;
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * shape_[1] + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Small dense kernels over spans. All of them check lengths and throw
// DimensionError on mismatch.
namespace linalg {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
// y += W x, W is rows x cols
void gemv_add(const Tensor& w, std::span<const double> x, std::span<double> y);
// y += W^T x
void gemv_t_add(const Tensor& w, std::span<const double> x,
                std::span<double> y);
// W += a b^T
void outer_add(std::span<const double> a, std::span<const double> b,
               Tensor& w);
// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void add_to(std::span<const double> x, std::span<double> y);

}  // namespace linalg

bool all_finite(std::span<const double> values);
void require_same_size(std::size_t a, std::size_t b, const char* what);

}  // namespace musecap

#endif  // MUSECAP_TENSOR_HPP_
