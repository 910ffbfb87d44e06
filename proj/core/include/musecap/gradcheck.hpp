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

#ifndef MUSECAP_GRADCHECK_HPP_
#define MUSECAP_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace musecap {

inline constexpr double kGradCheckStep = 1e-6;

struct GradCheckReport {
  // ||g_analytic - g_fd||_inf / max(||g_analytic||_inf, 1e-8)
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = false;
  std::vector<double> numeric;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences per coordinate. Throws NumericalError if f returns a
// non-finite value.
GradCheckReport gradient_check(const ScalarFunction& f,
                               std::span<const double> x,
                               std::span<const double> analytic,
                               double tolerance,
                               double step = kGradCheckStep);

}  // namespace musecap

#endif  // MUSECAP_GRADCHECK_HPP_
