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

#include "musecap/dense.hpp"

#include "musecap/params.hpp"
#include "musecap/random.hpp"

namespace musecap {

DenseParams DenseParams::zeros(std::size_t input, std::size_t output) {
  return DenseParams{Tensor({output, input}), Tensor({output})};
}

DenseParams DenseParams::initialized(std::size_t input, std::size_t output,
                                     std::uint64_t seed,
                                     const std::string& prefix) {
  DenseParams p = zeros(input, output);
  glorot_uniform(p.weight, input, output, derive_seed(seed, prefix + "weight"));
  return p;
}

std::vector<double> dense_forward(const DenseParams& p,
                                  std::span<const double> x) {
  std::vector<double> y(p.bias.values().begin(), p.bias.values().end());
  linalg::gemv_add(p.weight, x, y);
  return y;
}

std::vector<double> dense_backward(const DenseParams& p,
                                   std::span<const double> x,
                                   std::span<const double> dy,
                                   DenseParams& grads) {
  require_same_size(dy.size(), p.output_size(), "dense upstream gradient");
  linalg::outer_add(dy, x, grads.weight);
  linalg::add_to(dy, grads.bias.values());
  std::vector<double> dx(p.input_size(), 0.0);
  linalg::gemv_t_add(p.weight, dy, dx);
  return dx;
}

}  // namespace musecap
