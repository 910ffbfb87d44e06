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

#ifndef MUSECAP_DENSE_HPP_
#define MUSECAP_DENSE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "musecap/tensor.hpp"

namespace musecap {

// Affine layer y = W x + b.
struct DenseParams {
  Tensor weight;  // out x in
  Tensor bias;    // out

  static DenseParams zeros(std::size_t input, std::size_t output);
  static DenseParams initialized(std::size_t input, std::size_t output,
                                 std::uint64_t seed,
                                 const std::string& prefix);

  std::size_t input_size() const { return weight.cols(); }
  std::size_t output_size() const { return weight.rows(); }

  template <typename F>
  void visit_params(const std::string& prefix, F&& f) {
    f(prefix + "weight", weight);
    f(prefix + "bias", bias);
  }
  template <typename F>
  void visit_params(const std::string& prefix, F&& f) const {
    f(prefix + "weight", weight);
    f(prefix + "bias", bias);
  }
};

std::vector<double> dense_forward(const DenseParams& p,
                                  std::span<const double> x);

// Accumulates into grads, returns dL/dx.
std::vector<double> dense_backward(const DenseParams& p,
                                   std::span<const double> x,
                                   std::span<const double> dy,
                                   DenseParams& grads);

}  // namespace musecap

#endif  // MUSECAP_DENSE_HPP_
