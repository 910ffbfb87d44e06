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

#ifndef MUSECAP_SEQ2SEQ_HPP_
#define MUSECAP_SEQ2SEQ_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "musecap/dense.hpp"
#include "musecap/embeddings.hpp"
#include "musecap/gru.hpp"
#include "musecap/tensor.hpp"

namespace musecap {

struct Seq2SeqDims {
  std::size_t input = 0;      // track feature size, D_a + D_w (or D_a + D_s)
  std::size_t embedding = 0;  // D_w
  std::size_t hidden = 0;     // H, shared by encoder and decoder

  friend bool operator==(const Seq2SeqDims&, const Seq2SeqDims&) = default;
};

// Two-layer GRU encoder, two-layer GRU decoder, linear projection H -> D_w.
struct Seq2SeqModel {
  GruParams enc1, enc2, dec1, dec2;
  DenseParams proj;

  static Seq2SeqModel zeros(const Seq2SeqDims& dims);
  static Seq2SeqModel initialized(const Seq2SeqDims& dims, std::uint64_t seed);

  Seq2SeqDims dims() const;

  template <typename F>
  void visit_params(const std::string& prefix, F&& f) {
    visit(*this, prefix, f);
  }
  template <typename F>
  void visit_params(const std::string& prefix, F&& f) const {
    visit(*this, prefix, f);
  }

 private:
  template <typename Self, typename F>
  static void visit(Self& s, const std::string& p, F& f) {
    s.enc1.visit_params(p + "encoder.layer1.", f);
    s.enc2.visit_params(p + "encoder.layer2.", f);
    s.dec1.visit_params(p + "decoder.layer1.", f);
    s.dec2.visit_params(p + "decoder.layer2.", f);
    s.proj.visit_params(p + "projection.", f);
  }
};

// Final hidden state of each encoder layer; seeds the matching decoder layer.
struct Context {
  std::vector<double> h1, h2;
};

struct EncoderTrace {
  std::vector<GruCache> layer1, layer2;
};

// tracks: N x input, N >= 1. Both layers start from zero state.
Context encode(const Seq2SeqModel& model, const Tensor& tracks,
               EncoderTrace* trace = nullptr);

// Padded batch: B x T x input with per-row valid lengths (1..T). Steps past
// a row's length leave its state untouched, so padding content is ignored.
std::vector<Context> encode_batch(const Seq2SeqModel& model,
                                  const Tensor& padded,
                                  std::span<const std::size_t> lengths);

// Backpropagates a context gradient through the encoder. Accumulates into
// grads and returns dL/d tracks (N x input).
Tensor encode_backward(const Seq2SeqModel& model, const EncoderTrace& trace,
                       const Context& d_context, Seq2SeqModel& grads);

struct DecodeTrainResult {
  double loss = 0.0;   // mean cosine-proximity loss over steps
  Tensor predictions;  // M x D_w
  Context d_context;   // filled when grads are requested
};

// Teacher-forced decode. Step 0 input is the zero vector, step m > 0 input is
// targets[m-1]. With grads != nullptr, decoder/projection gradients are
// accumulated and d_context is returned.
DecodeTrainResult decode_train(const Seq2SeqModel& model,
                               const Context& context, const Tensor& targets,
                               Seq2SeqModel* grads = nullptr);

// Greedy nearest-word decoding; stops at kEosToken (not emitted) or after
// max_len steps. The embedding of the emitted word is fed back.
std::vector<std::string> decode_greedy(const Seq2SeqModel& model,
                                       const Context& context,
                                       const EmbeddingTable& table,
                                       std::size_t max_len);

// encode + decode_train. Optionally accumulates every parameter gradient and
// returns dL/d tracks.
double caption_loss(const Seq2SeqModel& model, const Tensor& tracks,
                    const Tensor& targets, Seq2SeqModel* grads = nullptr,
                    Tensor* d_tracks = nullptr);

}  // namespace musecap

#endif  // MUSECAP_SEQ2SEQ_HPP_
