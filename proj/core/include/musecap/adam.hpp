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

#ifndef MUSECAP_ADAM_HPP_
#define MUSECAP_ADAM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "musecap/params.hpp"
#include "musecap/tensor.hpp"

namespace musecap {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for a fixed list of parameter tensors. Not internally
// synchronized.
class AdamState {
 public:
  AdamState(AdamConfig config, std::span<const ConstParamRef> params);

  template <typename Model>
  AdamState(AdamConfig config, const Model& model)
      : AdamState(config, std::span<const ConstParamRef>(param_refs(model))) {}

  // Applies one bias-corrected update. `grads` must mirror `params` in
  // count and shapes; throws DimensionError / NumericalError otherwise,
  // leaving all state untouched.
  void step(std::span<const ParamRef> params,
            std::span<const ConstParamRef> grads);

  template <typename Model>
  void step(Model& model, const Model& grads) {
    const auto p = param_refs(model);
    const auto g = param_refs(grads);
    step(std::span<const ParamRef>(p), std::span<const ConstParamRef>(g));
  }

  std::uint64_t step_count() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace musecap

#endif  // MUSECAP_ADAM_HPP_
