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

#ifndef MUSECAP_LOSS_HPP_
#define MUSECAP_LOSS_HPP_

#include <span>
#include <vector>

namespace musecap {

inline constexpr double kCosineEpsilon = 1e-12;

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d prediction
};

// 1 - cos(pred, target), with (|p| + eps)(|t| + eps) in the denominator.
// Throws DataError on an all-zero target.
LossAndGrad cosine_proximity_loss(std::span<const double> pred,
                                  std::span<const double> target);

}  // namespace musecap

#endif  // MUSECAP_LOSS_HPP_
