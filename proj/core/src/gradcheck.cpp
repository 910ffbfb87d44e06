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

#include "musecap/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "musecap/errors.hpp"
#include "musecap/tensor.hpp"

namespace musecap {

GradCheckReport gradient_check(const ScalarFunction& f,
                               std::span<const double> x,
                               std::span<const double> analytic,
                               double tolerance, double step) {
  require_same_size(analytic.size(), x.size(), "gradient_check");
  std::vector<double> probe(x.begin(), x.end());

  GradCheckReport report;
  report.numeric.resize(x.size());
  double scale = 1e-8;
  for (double g : analytic) scale = std::max(scale, std::abs(g));

  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double plus = f(probe);
    probe[i] = x[i] - step;
    const double minus = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericalError("gradient_check: non-finite function value at "
                           "coordinate " + std::to_string(i));
    }
    report.numeric[i] = (plus - minus) / (2.0 * step);
    const double err = std::abs(analytic[i] - report.numeric[i]);
    if (err > worst) {
      worst = err;
      report.worst_index = i;
    }
  }
  report.max_relative_error = worst / scale;
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace musecap
