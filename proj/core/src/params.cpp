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

#include "musecap/params.hpp"

#include <algorithm>
#include <cmath>

#include "musecap/errors.hpp"
#include "musecap/random.hpp"

namespace musecap {

void assign_flat(std::span<const double> flat,
                 std::span<const ParamRef> refs) {
  std::size_t total = 0;
  for (const auto& r : refs) total += r.tensor->size();
  require_same_size(flat.size(), total, "flat parameter vector");
  std::size_t offset = 0;
  for (const auto& r : refs) {
    auto dst = r.tensor->values();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                dst.size(), dst.begin());
    offset += dst.size();
  }
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                    std::uint64_t seed) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

}  // namespace musecap
