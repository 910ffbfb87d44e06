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

#include "musecap/gru.hpp"

#include <cmath>

#include "musecap/errors.hpp"
#include "musecap/params.hpp"
#include "musecap/random.hpp"

namespace musecap {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

void check_dims(const GruParams& p, std::size_t x, std::size_t h) {
  require_same_size(x, p.input_size(), "gru input");
  require_same_size(h, p.hidden_size(), "gru hidden state");
}

}  // namespace

GruParams GruParams::zeros(std::size_t input, std::size_t hidden) {
  GruParams p;
  p.w_z = p.w_r = p.w_h = Tensor({hidden, input});
  p.u_z = p.u_r = p.u_h = Tensor({hidden, hidden});
  p.b_z = p.b_r = p.b_h = Tensor({hidden});
  return p;
}

GruParams GruParams::initialized(std::size_t input, std::size_t hidden,
                                 std::uint64_t seed,
                                 const std::string& prefix) {
  GruParams p = zeros(input, hidden);
  p.visit_params(prefix, [&](const std::string& name, Tensor& t) {
    if (t.rank() == 2) {
      glorot_uniform(t, t.cols(), t.rows(), derive_seed(seed, name));
    }
  });
  return p;
}

std::vector<double> gru_forward(const GruParams& p, std::span<const double> x,
                                std::span<const double> h_prev,
                                GruCache* cache) {
  check_dims(p, x.size(), h_prev.size());
  const std::size_t n = p.hidden_size();

  std::vector<double> z(p.b_z.values().begin(), p.b_z.values().end());
  std::vector<double> r(p.b_r.values().begin(), p.b_r.values().end());
  linalg::gemv_add(p.w_z, x, z);
  linalg::gemv_add(p.u_z, h_prev, z);
  linalg::gemv_add(p.w_r, x, r);
  linalg::gemv_add(p.u_r, h_prev, r);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = sigmoid(z[i]);
    r[i] = sigmoid(r[i]);
  }

  std::vector<double> r_h(n);
  for (std::size_t i = 0; i < n; ++i) r_h[i] = r[i] * h_prev[i];

  std::vector<double> h_tilde(p.b_h.values().begin(), p.b_h.values().end());
  linalg::gemv_add(p.w_h, x, h_tilde);
  linalg::gemv_add(p.u_h, r_h, h_tilde);
  for (double& v : h_tilde) v = std::tanh(v);

  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * h_tilde[i];
  }

  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->h_tilde = std::move(h_tilde);
    cache->r_h = std::move(r_h);
  }
  return h;
}

GruInputGrads gru_backward(std::span<const double> dh, const GruCache& cache,
                           const GruParams& p, GruParams& grads) {
  if (!cache.valid()) throw StateError("gru_backward: empty cache");
  if (cache.x.size() != p.input_size() ||
      cache.h_prev.size() != p.hidden_size() ||
      cache.z.size() != p.hidden_size()) {
    throw StateError("gru_backward: cache does not match parameters");
  }
  require_same_size(dh.size(), p.hidden_size(), "gru upstream gradient");
  require_same_size(grads.hidden_size(), p.hidden_size(), "gru grads");
  require_same_size(grads.input_size(), p.input_size(), "gru grads");

  const std::size_t n = p.hidden_size();
  GruInputGrads out{std::vector<double>(p.input_size(), 0.0),
                    std::vector<double>(n, 0.0)};

  std::vector<double> da_z(n), da_h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = cache.z[i];
    const double ht = cache.h_tilde[i];
    out.dh_prev[i] = dh[i] * (1.0 - z);
    da_z[i] = dh[i] * (ht - cache.h_prev[i]) * z * (1.0 - z);
    da_h[i] = dh[i] * z * (1.0 - ht * ht);
  }

  // candidate path
  linalg::outer_add(da_h, cache.x, grads.w_h);
  linalg::outer_add(da_h, cache.r_h, grads.u_h);
  linalg::add_to(da_h, grads.b_h.values());
  linalg::gemv_t_add(p.w_h, da_h, out.dx);
  std::vector<double> d_rh(n, 0.0);
  linalg::gemv_t_add(p.u_h, da_h, d_rh);

  std::vector<double> da_r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = cache.r[i];
    out.dh_prev[i] += d_rh[i] * r;
    da_r[i] = d_rh[i] * cache.h_prev[i] * r * (1.0 - r);
  }

  // update gate
  linalg::outer_add(da_z, cache.x, grads.w_z);
  linalg::outer_add(da_z, cache.h_prev, grads.u_z);
  linalg::add_to(da_z, grads.b_z.values());
  linalg::gemv_t_add(p.w_z, da_z, out.dx);
  linalg::gemv_t_add(p.u_z, da_z, out.dh_prev);

  // reset gate
  linalg::outer_add(da_r, cache.x, grads.w_r);
  linalg::outer_add(da_r, cache.h_prev, grads.u_r);
  linalg::add_to(da_r, grads.b_r.values());
  linalg::gemv_t_add(p.w_r, da_r, out.dx);
  linalg::gemv_t_add(p.u_r, da_r, out.dh_prev);

  return out;
}

}  // namespace musecap
