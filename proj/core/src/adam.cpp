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

#include "musecap/adam.hpp"

#include <cmath>

#include "musecap/errors.hpp"

namespace musecap {

AdamState::AdamState(AdamConfig config, std::span<const ConstParamRef> params)
    : config_(config) {
  if (!(config.lr > 0) || !(config.beta1 > 0) || !(config.beta1 < 1) ||
      !(config.beta2 > 0) || !(config.beta2 < 1) || !(config.epsilon > 0)) {
    throw ConfigError("adam: lr, epsilon must be > 0 and betas in (0, 1)");
  }
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.tensor->shape());
    v_.emplace_back(p.tensor->shape());
  }
}

void AdamState::step(std::span<const ParamRef> params,
                     std::span<const ConstParamRef> grads) {
  require_same_size(params.size(), m_.size(), "adam parameter count");
  require_same_size(grads.size(), m_.size(), "adam gradient count");
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (params[i].tensor->shape() != m_[i].shape() ||
        grads[i].tensor->shape() != m_[i].shape()) {
      throw DimensionError("adam: shape mismatch for " + params[i].name);
    }
    if (!grads[i].tensor->all_finite()) {
      throw NumericalError("adam: non-finite gradient for " + grads[i].name);
    }
  }

  ++t_;
  const auto& c = config_;
  const double t = static_cast<double>(t_);
  const double c1 = 1.0 - std::pow(c.beta1, t);
  const double c2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    auto theta = params[i].tensor->values();
    auto g = grads[i].tensor->values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      theta[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace musecap
