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

#include "musecap/loss.hpp"

#include <algorithm>

#include "musecap/errors.hpp"
#include "musecap/tensor.hpp"

namespace musecap {

LossAndGrad cosine_proximity_loss(std::span<const double> pred,
                                  std::span<const double> target) {
  require_same_size(pred.size(), target.size(), "cosine loss");
  if (pred.empty()) throw DimensionError("cosine loss on empty vectors");
  if (std::all_of(target.begin(), target.end(),
                  [](double v) { return v == 0.0; })) {
    throw DataError("cosine loss: all-zero target vector");
  }

  const double s = linalg::dot(pred, target);
  const double pn = linalg::norm(pred);
  const double a = pn + kCosineEpsilon;
  const double b = linalg::norm(target) + kCosineEpsilon;

  LossAndGrad out;
  out.loss = 1.0 - s / (a * b);
  out.grad.resize(pred.size());
  // d/dp [s / (a b)] = t / (a b) - s p / (a^2 b |p|)
  const double radial = pn > 0.0 ? s / (a * a * b * pn) : 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.grad[i] = -(target[i] / (a * b) - radial * pred[i]);
  }
  return out;
}

}  // namespace musecap
