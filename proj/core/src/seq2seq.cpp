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

#include "musecap/seq2seq.hpp"

#include <algorithm>

#include "musecap/errors.hpp"
#include "musecap/loss.hpp"

namespace musecap {

Seq2SeqModel Seq2SeqModel::zeros(const Seq2SeqDims& d) {
  if (d.input == 0 || d.embedding == 0 || d.hidden == 0) {
    throw ConfigError("seq2seq dimensions must be >= 1");
  }
  Seq2SeqModel m;
  m.enc1 = GruParams::zeros(d.input, d.hidden);
  m.enc2 = GruParams::zeros(d.hidden, d.hidden);
  m.dec1 = GruParams::zeros(d.embedding, d.hidden);
  m.dec2 = GruParams::zeros(d.hidden, d.hidden);
  m.proj = DenseParams::zeros(d.hidden, d.embedding);
  return m;
}

Seq2SeqModel Seq2SeqModel::initialized(const Seq2SeqDims& d,
                                       std::uint64_t seed) {
  if (d.input == 0 || d.embedding == 0 || d.hidden == 0) {
    throw ConfigError("seq2seq dimensions must be >= 1");
  }
  Seq2SeqModel m;
  m.enc1 = GruParams::initialized(d.input, d.hidden, seed, "encoder.layer1.");
  m.enc2 = GruParams::initialized(d.hidden, d.hidden, seed, "encoder.layer2.");
  m.dec1 =
      GruParams::initialized(d.embedding, d.hidden, seed, "decoder.layer1.");
  m.dec2 = GruParams::initialized(d.hidden, d.hidden, seed, "decoder.layer2.");
  m.proj = DenseParams::initialized(d.hidden, d.embedding, seed, "projection.");
  return m;
}

Seq2SeqDims Seq2SeqModel::dims() const {
  return {enc1.input_size(), proj.output_size(), enc1.hidden_size()};
}

Context encode(const Seq2SeqModel& model, const Tensor& tracks,
               EncoderTrace* trace) {
  if (tracks.rank() != 2 || tracks.rows() == 0) {
    throw DataError("encode: empty track sequence");
  }
  require_same_size(tracks.cols(), model.enc1.input_size(), "track feature");
  const std::size_t h = model.enc1.hidden_size();
  const std::size_t n = tracks.rows();

  Context c{std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)};
  if (trace) {
    trace->layer1.assign(n, {});
    trace->layer2.assign(n, {});
  }
  for (std::size_t t = 0; t < n; ++t) {
    c.h1 = gru_forward(model.enc1, tracks.row(t), c.h1,
                       trace ? &trace->layer1[t] : nullptr);
    c.h2 = gru_forward(model.enc2, c.h1, c.h2,
                       trace ? &trace->layer2[t] : nullptr);
  }
  return c;
}

std::vector<Context> encode_batch(const Seq2SeqModel& model,
                                  const Tensor& padded,
                                  std::span<const std::size_t> lengths) {
  if (padded.rank() != 3) throw DimensionError("encode_batch: need B x T x D");
  const std::size_t batch = padded.shape()[0];
  const std::size_t steps = padded.shape()[1];
  const std::size_t dim = padded.shape()[2];
  require_same_size(lengths.size(), batch, "encode_batch lengths");
  require_same_size(dim, model.enc1.input_size(), "track feature");
  for (std::size_t len : lengths) {
    if (len == 0 || len > steps) {
      throw DataError("encode_batch: sequence length out of range");
    }
  }

  const std::size_t h = model.enc1.hidden_size();
  std::vector<Context> states(
      batch, Context{std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)});
  const auto data = padded.values();
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      if (t >= lengths[b]) continue;
      const auto x = data.subspan((b * steps + t) * dim, dim);
      auto& s = states[b];
      s.h1 = gru_forward(model.enc1, x, s.h1);
      s.h2 = gru_forward(model.enc2, s.h1, s.h2);
    }
  }
  return states;
}

Tensor encode_backward(const Seq2SeqModel& model, const EncoderTrace& trace,
                       const Context& d_context, Seq2SeqModel& grads) {
  const std::size_t n = trace.layer1.size();
  if (n == 0 || trace.layer2.size() != n) {
    throw StateError("encode_backward: empty or inconsistent trace");
  }
  Tensor d_tracks({n, model.enc1.input_size()});
  std::vector<double> dh1 = d_context.h1;
  std::vector<double> dh2 = d_context.h2;
  for (std::size_t t = n; t-- > 0;) {
    const auto g2 = gru_backward(dh2, trace.layer2[t], model.enc2, grads.enc2);
    dh2 = g2.dh_prev;
    linalg::add_to(g2.dx, dh1);
    const auto g1 = gru_backward(dh1, trace.layer1[t], model.enc1, grads.enc1);
    dh1 = g1.dh_prev;
    std::copy(g1.dx.begin(), g1.dx.end(), d_tracks.row(t).begin());
  }
  return d_tracks;
}

DecodeTrainResult decode_train(const Seq2SeqModel& model,
                               const Context& context, const Tensor& targets,
                               Seq2SeqModel* grads) {
  if (targets.rank() != 2 || targets.rows() == 0) {
    throw DataError("decode_train: empty target sequence");
  }
  const std::size_t emb = model.proj.output_size();
  const std::size_t hid = model.dec1.hidden_size();
  require_same_size(targets.cols(), emb, "target embedding");
  require_same_size(context.h1.size(), hid, "context layer 1");
  require_same_size(context.h2.size(), hid, "context layer 2");
  const std::size_t steps = targets.rows();

  DecodeTrainResult out;
  out.predictions = Tensor({steps, emb});
  std::vector<GruCache> c1(steps), c2(steps);
  std::vector<std::vector<double>> top(steps);
  std::vector<std::vector<double>> d_pred(steps);

  std::vector<double> s1 = context.h1, s2 = context.h2;
  const std::vector<double> zero_input(emb, 0.0);
  const double scale = 1.0 / static_cast<double>(steps);
  for (std::size_t m = 0; m < steps; ++m) {
    const auto input =
        m == 0 ? std::span<const double>(zero_input) : targets.row(m - 1);
    s1 = gru_forward(model.dec1, input, s1, &c1[m]);
    s2 = gru_forward(model.dec2, s1, s2, &c2[m]);
    const auto pred = dense_forward(model.proj, s2);
    std::copy(pred.begin(), pred.end(), out.predictions.row(m).begin());
    auto lg = cosine_proximity_loss(pred, targets.row(m));
    out.loss += lg.loss * scale;
    for (double& g : lg.grad) g *= scale;
    d_pred[m] = std::move(lg.grad);
    top[m] = s2;
  }
  if (!grads) return out;

  std::vector<double> carry1(hid, 0.0), carry2(hid, 0.0);
  for (std::size_t m = steps; m-- > 0;) {
    auto ds2 = dense_backward(model.proj, top[m], d_pred[m], grads->proj);
    linalg::add_to(carry2, ds2);
    const auto g2 = gru_backward(ds2, c2[m], model.dec2, grads->dec2);
    carry2 = g2.dh_prev;
    std::vector<double> ds1 = g2.dx;
    linalg::add_to(carry1, ds1);
    const auto g1 = gru_backward(ds1, c1[m], model.dec1, grads->dec1);
    carry1 = g1.dh_prev;
  }
  out.d_context = Context{std::move(carry1), std::move(carry2)};
  return out;
}

std::vector<std::string> decode_greedy(const Seq2SeqModel& model,
                                       const Context& context,
                                       const EmbeddingTable& table,
                                       std::size_t max_len) {
  const std::size_t emb = model.proj.output_size();
  require_same_size(table.dim(), emb, "embedding table");
  std::vector<std::string> words;
  std::vector<double> input(emb, 0.0);
  std::vector<double> s1 = context.h1, s2 = context.h2;
  for (std::size_t m = 0; m < max_len; ++m) {
    s1 = gru_forward(model.dec1, input, s1);
    s2 = gru_forward(model.dec2, s1, s2);
    const auto pred = dense_forward(model.proj, s2);
    const NearestWord w = nearest_word(table, pred);
    if (w.token == kEosToken) break;
    words.emplace_back(w.token);
    const auto row = table.row(w.index);
    input.assign(row.begin(), row.end());
  }
  return words;
}

double caption_loss(const Seq2SeqModel& model, const Tensor& tracks,
                    const Tensor& targets, Seq2SeqModel* grads,
                    Tensor* d_tracks) {
  EncoderTrace trace;
  const Context ctx = encode(model, tracks, grads ? &trace : nullptr);
  auto dec = decode_train(model, ctx, targets, grads);
  if (grads) {
    Tensor dt = encode_backward(model, trace, dec.d_context, *grads);
    if (d_tracks) *d_tracks = std::move(dt);
  }
  return dec.loss;
}

}  // namespace musecap
