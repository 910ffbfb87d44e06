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

#ifndef MUSECAP_PARAMS_HPP_
#define MUSECAP_PARAMS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "musecap/tensor.hpp"

namespace musecap {

// Parameter structs expose
//   template <class F> void visit_params(const std::string& prefix, F&& f)
// (const and non-const) calling f(name, tensor) for every trainable tensor
// in a fixed order. Everything below is generic over that protocol.

struct ParamRef {
  std::string name;
  Tensor* tensor;
};

struct ConstParamRef {
  std::string name;
  const Tensor* tensor;
};

template <typename Model>
std::vector<ParamRef> param_refs(Model& model) {
  std::vector<ParamRef> out;
  model.visit_params("", [&](const std::string& name, Tensor& t) {
    out.push_back({name, &t});
  });
  return out;
}

template <typename Model>
std::vector<ConstParamRef> param_refs(const Model& model) {
  std::vector<ConstParamRef> out;
  model.visit_params("", [&](const std::string& name, const Tensor& t) {
    out.push_back({name, &t});
  });
  return out;
}

// Same structure, all values zero. Used as a gradient accumulator.
template <typename Model>
Model zeros_like(const Model& model) {
  Model g = model;
  g.visit_params("", [](const std::string&, Tensor& t) { t.fill(0.0); });
  return g;
}

template <typename Model>
void set_zero(Model& model) {
  model.visit_params("", [](const std::string&, Tensor& t) { t.fill(0.0); });
}

template <typename Model>
std::size_t parameter_count(const Model& model) {
  std::size_t n = 0;
  model.visit_params("", [&](const std::string&, const Tensor& t) {
    n += t.size();
  });
  return n;
}

template <typename Model>
std::vector<double> flatten_params(const Model& model) {
  std::vector<double> out;
  model.visit_params("", [&](const std::string&, const Tensor& t) {
    out.insert(out.end(), t.values().begin(), t.values().end());
  });
  return out;
}

void assign_flat(std::span<const double> flat, std::span<const ParamRef> refs);

template <typename Model>
void unflatten_params(std::span<const double> flat, Model& model) {
  const auto refs = param_refs(model);
  assign_flat(flat, refs);
}

// Glorot/Xavier uniform on [-a, a], a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                    std::uint64_t seed);

}  // namespace musecap

#endif  // MUSECAP_PARAMS_HPP_
