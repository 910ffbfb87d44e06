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

#ifndef MUSECAP_GRU_HPP_
#define MUSECAP_GRU_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "musecap/tensor.hpp"

namespace musecap {

// One GRU cell:
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   h~ = tanh(W_h x + U_h (r * h) + b_h)
//   h' = (1 - z) * h + z * h~
struct GruParams {
  Tensor w_z, w_r, w_h;  // hidden x input
  Tensor u_z, u_r, u_h;  // hidden x hidden
  Tensor b_z, b_r, b_h;  // hidden

  static GruParams zeros(std::size_t input, std::size_t hidden);
  // Glorot-uniform matrices, zero biases. Each tensor draws from its own
  // stream derived from (seed, prefix + name).
  static GruParams initialized(std::size_t input, std::size_t hidden,
                               std::uint64_t seed, const std::string& prefix);

  std::size_t input_size() const { return w_z.cols(); }
  std::size_t hidden_size() const { return w_z.rows(); }

  template <typename F>
  void visit_params(const std::string& prefix, F&& f) {
    visit(*this, prefix, f);
  }
  template <typename F>
  void visit_params(const std::string& prefix, F&& f) const {
    visit(*this, prefix, f);
  }

 private:
  template <typename Self, typename F>
  static void visit(Self& s, const std::string& p, F& f) {
    f(p + "w_z", s.w_z);
    f(p + "w_r", s.w_r);
    f(p + "w_h", s.w_h);
    f(p + "u_z", s.u_z);
    f(p + "u_r", s.u_r);
    f(p + "u_h", s.u_h);
    f(p + "b_z", s.b_z);
    f(p + "b_r", s.b_r);
    f(p + "b_h", s.b_h);
  }
};

// Intermediates kept by the forward pass for the backward pass.
struct GruCache {
  std::vector<double> x, h_prev, z, r, h_tilde, r_h;
  bool valid() const { return !z.empty(); }
};

std::vector<double> gru_forward(const GruParams& p, std::span<const double> x,
                                std::span<const double> h_prev,
                                GruCache* cache = nullptr);

struct GruInputGrads {
  std::vector<double> dx;
  std::vector<double> dh_prev;
};

// Accumulates parameter gradients into `grads` (+=) and returns the
// gradients with respect to the cell inputs.
GruInputGrads gru_backward(std::span<const double> dh, const GruCache& cache,
                           const GruParams& p, GruParams& grads);

}  // namespace musecap

#endif  // MUSECAP_GRU_HPP_
