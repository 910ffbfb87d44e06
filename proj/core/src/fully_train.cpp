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

#include "musecap/fully_train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "musecap/errors.hpp"
#include "musecap/params.hpp"
#include "musecap/random.hpp"
#include "musecap/text_format.hpp"

namespace musecap {

Spectrogram::Spectrogram(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 2) throw DataError("spectrogram must be a matrix");
  if (!values_.all_finite()) {
    throw NumericalError("spectrogram contains non-finite values");
  }
}

Spectrogram parse_spectrogram(std::istream& in) {
  return Spectrogram(textfmt::parse_matrix(in));
}

Spectrogram load_spectrogram_file(const std::filesystem::path& path) {
  return Spectrogram(textfmt::parse_matrix_file(path));
}

void write_spectrogram_file(const Spectrogram& s,
                            const std::filesystem::path& path) {
  textfmt::write_matrix_file(s.values(), path);
}

namespace {

constexpr std::size_t kKernel = 3;

FeatureMap make_map(std::size_t c, std::size_t h, std::size_t w) {
  return FeatureMap{c, h, w, std::vector<double>(c * h * w, 0.0)};
}

std::size_t widx(std::size_t o, std::size_t c, std::size_t channels,
                 std::size_t ki, std::size_t kj) {
  return ((o * channels + c) * kKernel + ki) * kKernel + kj;
}

// 3x3 convolution with one pixel of zero padding, stride 1.
FeatureMap conv3x3_same(const FeatureMap& in, const Tensor& w,
                        const Tensor& b) {
  const std::size_t out_c = w.shape()[0];
  FeatureMap out = make_map(out_c, in.height, in.width);
  const auto wv = w.values();
  for (std::size_t o = 0; o < out_c; ++o) {
    for (std::size_t i = 0; i < in.height; ++i) {
      for (std::size_t j = 0; j < in.width; ++j) {
        double s = b[o];
        for (std::size_t c = 0; c < in.channels; ++c) {
          for (std::size_t ki = 0; ki < kKernel; ++ki) {
            const std::size_t ii = i + ki;
            if (ii < 1 || ii > in.height) continue;
            for (std::size_t kj = 0; kj < kKernel; ++kj) {
              const std::size_t jj = j + kj;
              if (jj < 1 || jj > in.width) continue;
              s += wv[widx(o, c, in.channels, ki, kj)] *
                   in.at(c, ii - 1, jj - 1);
            }
          }
        }
        out.at(o, i, j) = s;
      }
    }
  }
  return out;
}

// Accumulates dW, db; returns dL/d input when want_input is set.
FeatureMap conv3x3_same_backward(const FeatureMap& d_out, const FeatureMap& in,
                                 const Tensor& w, Tensor& dw, Tensor& db,
                                 bool want_input) {
  FeatureMap d_in = make_map(in.channels, in.height, in.width);
  const auto wv = w.values();
  auto dwv = dw.values();
  for (std::size_t o = 0; o < d_out.channels; ++o) {
    for (std::size_t i = 0; i < d_out.height; ++i) {
      for (std::size_t j = 0; j < d_out.width; ++j) {
        const double g = d_out.at(o, i, j);
        if (g == 0.0) continue;
        db[o] += g;
        for (std::size_t c = 0; c < in.channels; ++c) {
          for (std::size_t ki = 0; ki < kKernel; ++ki) {
            const std::size_t ii = i + ki;
            if (ii < 1 || ii > in.height) continue;
            for (std::size_t kj = 0; kj < kKernel; ++kj) {
              const std::size_t jj = j + kj;
              if (jj < 1 || jj > in.width) continue;
              const std::size_t k = widx(o, c, in.channels, ki, kj);
              dwv[k] += g * in.at(c, ii - 1, jj - 1);
              if (want_input) d_in.at(c, ii - 1, jj - 1) += g * wv[k];
            }
          }
        }
      }
    }
  }
  return d_in;
}

FeatureMap relu(FeatureMap m) {
  for (double& v : m.data) v = std::max(v, 0.0);
  return m;
}

void relu_backward(FeatureMap& d, const FeatureMap& pre) {
  for (std::size_t k = 0; k < d.data.size(); ++k) {
    if (!(pre.data[k] > 0.0)) d.data[k] = 0.0;
  }
}

}  // namespace

FeatureMap maxpool2x2_forward(const FeatureMap& in,
                              std::vector<std::size_t>* argmax) {
  const std::size_t oh = in.height / 2, ow = in.width / 2;
  if (oh == 0 || ow == 0) throw DataError("maxpool: input smaller than 2x2");
  FeatureMap out = make_map(in.channels, oh, ow);
  if (argmax) argmax->assign(out.data.size(), 0);
  std::size_t k = 0;
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++k) {
        std::size_t best = (c * in.height + 2 * i) * in.width + 2 * j;
        for (std::size_t di = 0; di < 2; ++di) {
          for (std::size_t dj = 0; dj < 2; ++dj) {
            const std::size_t idx =
                (c * in.height + 2 * i + di) * in.width + 2 * j + dj;
            if (in.data[idx] > in.data[best]) best = idx;
          }
        }
        out.data[k] = in.data[best];
        if (argmax) (*argmax)[k] = best;
      }
    }
  }
  return out;
}

FeatureMap maxpool2x2_backward(const FeatureMap& d_out,
                               std::span<const std::size_t> argmax,
                               std::size_t channels, std::size_t height,
                               std::size_t width) {
  require_same_size(argmax.size(), d_out.data.size(), "maxpool argmax");
  FeatureMap d_in = make_map(channels, height, width);
  for (std::size_t k = 0; k < argmax.size(); ++k) {
    d_in.data[argmax[k]] += d_out.data[k];
  }
  return d_in;
}

AudioSummarizerParams AudioSummarizerParams::zeros(std::size_t audio_dim) {
  AudioSummarizerParams p;
  p.conv1_w = Tensor({kConv1Channels, 1, kKernel, kKernel});
  p.conv1_b = Tensor({kConv1Channels});
  p.conv2_w = Tensor({kConv2Channels, kConv1Channels, kKernel, kKernel});
  p.conv2_b = Tensor({kConv2Channels});
  p.out = DenseParams::zeros(kConv2Channels, audio_dim);
  return p;
}

AudioSummarizerParams AudioSummarizerParams::initialized(
    std::size_t audio_dim, std::uint64_t seed, const std::string& prefix) {
  AudioSummarizerParams p = zeros(audio_dim);
  const std::size_t k2 = kKernel * kKernel;
  glorot_uniform(p.conv1_w, k2, kConv1Channels * k2,
                 derive_seed(seed, prefix + "conv1.weight"));
  glorot_uniform(p.conv2_w, kConv1Channels * k2, kConv2Channels * k2,
                 derive_seed(seed, prefix + "conv2.weight"));
  p.out = DenseParams::initialized(kConv2Channels, audio_dim, seed,
                                   prefix + "dense.");
  return p;
}

std::vector<double> audio_summarize(const AudioSummarizerParams& p,
                                    const Spectrogram& spec,
                                    AudioCache* cache) {
  if (spec.bands() < 4 || spec.frames() < 4) {
    throw DataError("spectrogram " + std::to_string(spec.bands()) + "x" +
                    std::to_string(spec.frames()) +
                    " too small; need at least 4x4");
  }
  AudioCache local;
  AudioCache& c = cache ? *cache : local;
  c.input = FeatureMap{1, spec.bands(), spec.frames(), spec.values().raw()};
  c.pre1 = conv3x3_same(c.input, p.conv1_w, p.conv1_b);
  c.pool1 = maxpool2x2_forward(relu(c.pre1), &c.arg1);
  c.pre2 = conv3x3_same(c.pool1, p.conv2_w, p.conv2_b);
  const FeatureMap pool2 = maxpool2x2_forward(relu(c.pre2), &c.arg2);
  c.pool2_h = pool2.height;
  c.pool2_w = pool2.width;

  const std::size_t area = pool2.height * pool2.width;
  c.pooled.assign(pool2.channels, 0.0);
  for (std::size_t ch = 0; ch < pool2.channels; ++ch) {
    double s = 0.0;
    for (std::size_t k = 0; k < area; ++k) s += pool2.data[ch * area + k];
    c.pooled[ch] = s / static_cast<double>(area);
  }
  return dense_forward(p.out, c.pooled);
}

void audio_summarize_backward(const AudioSummarizerParams& p,
                              const AudioCache& c,
                              std::span<const double> d_out,
                              AudioSummarizerParams& grads) {
  if (c.pooled.empty()) throw StateError("audio backward: empty cache");
  const auto d_pooled = dense_backward(p.out, c.pooled, d_out, grads.out);

  const std::size_t area = c.pool2_h * c.pool2_w;
  FeatureMap d_pool2 = make_map(kConv2Channels, c.pool2_h, c.pool2_w);
  for (std::size_t ch = 0; ch < kConv2Channels; ++ch) {
    for (std::size_t k = 0; k < area; ++k) {
      d_pool2.data[ch * area + k] = d_pooled[ch] / static_cast<double>(area);
    }
  }
  FeatureMap d_pre2 = maxpool2x2_backward(d_pool2, c.arg2, c.pre2.channels,
                                          c.pre2.height, c.pre2.width);
  relu_backward(d_pre2, c.pre2);
  FeatureMap d_pool1 = conv3x3_same_backward(d_pre2, c.pool1, p.conv2_w,
                                             grads.conv2_w, grads.conv2_b,
                                             true);
  FeatureMap d_pre1 = maxpool2x2_backward(d_pool1, c.arg1, c.pre1.channels,
                                          c.pre1.height, c.pre1.width);
  relu_backward(d_pre1, c.pre1);
  conv3x3_same_backward(d_pre1, c.input, p.conv1_w, grads.conv1_w,
                        grads.conv1_b, false);
}

std::vector<double> text_summarize(const GruParams& p, const Tensor& words,
                                   TextCache* cache) {
  if (words.rank() != 2 || words.rows() == 0) {
    throw DataError("text_summarize: empty word sequence");
  }
  std::vector<double> h(p.hidden_size(), 0.0);
  if (cache) cache->steps.assign(words.rows(), {});
  for (std::size_t k = 0; k < words.rows(); ++k) {
    h = gru_forward(p, words.row(k), h, cache ? &cache->steps[k] : nullptr);
  }
  return h;
}

Tensor text_summarize_backward(const GruParams& p, const TextCache& cache,
                               std::span<const double> d_sentence,
                               GruParams& grads) {
  if (cache.steps.empty()) throw StateError("text backward: empty cache");
  Tensor d_words({cache.steps.size(), p.input_size()});
  std::vector<double> dh(d_sentence.begin(), d_sentence.end());
  for (std::size_t k = cache.steps.size(); k-- > 0;) {
    const auto g = gru_backward(dh, cache.steps[k], p, grads);
    dh = g.dh_prev;
    std::copy(g.dx.begin(), g.dx.end(), d_words.row(k).begin());
  }
  return d_words;
}

std::vector<double> label_head_forward(const DenseParams& head,
                                       std::span<const double> feature) {
  auto out = dense_forward(head, feature);
  for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

MultitaskLoss multitask_loss(double caption_loss,
                             std::span<const double> outputs,
                             std::span<const double> labels, double lambda) {
  require_same_size(labels.size(), outputs.size(), "label vector");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (outputs.empty()) throw DimensionError("multitask_loss: no labels");
  for (double y : labels) {
    if (!(y >= 0.0 && y <= 1.0)) {
      throw DataError("label value outside [0, 1]");
    }
  }
  const double n = static_cast<double>(outputs.size());
  MultitaskLoss out;
  out.d_outputs.assign(outputs.size(), 0.0);
  double bce = 0.0;
  for (std::size_t l = 0; l < outputs.size(); ++l) {
    const double o = outputs[l];
    const double c = std::clamp(o, kLabelClamp, 1.0 - kLabelClamp);
    const double y = labels[l];
    bce -= y * std::log(c) + (1.0 - y) * std::log(1.0 - c);
    // Clamping cuts the gradient outside the open interval.
    if (o > kLabelClamp && o < 1.0 - kLabelClamp) {
      out.d_outputs[l] = -lambda * (y / c - (1.0 - y) / (1.0 - c)) / n;
    }
  }
  out.label_loss = bce / n;
  out.total = caption_loss + lambda * out.label_loss;
  return out;
}

FullModel FullModel::initialized(const FullDims& d, std::uint64_t seed) {
  if (d.audio == 0 || d.embedding == 0 || d.hidden == 0 || d.sentence == 0) {
    throw ConfigError("model dimensions must be >= 1");
  }
  FullModel m;
  m.audio = AudioSummarizerParams::initialized(d.audio, seed, "audio.");
  m.text = GruParams::initialized(d.embedding, d.sentence, seed, "text.");
  if (d.labels > 0) {
    m.label_head = DenseParams::initialized(d.audio + d.sentence, d.labels,
                                            seed, "label_head.");
  }
  m.seq2seq = Seq2SeqModel::initialized(
      {d.audio + d.sentence, d.embedding, d.hidden}, seed);
  return m;
}

FullDims FullModel::dims() const {
  FullDims d;
  d.audio = audio.output_size();
  d.embedding = text.input_size();
  d.hidden = seq2seq.enc1.hidden_size();
  d.sentence = text.hidden_size();
  d.labels = label_head ? label_head->output_size() : 0;
  return d;
}

namespace {

struct TrackForward {
  AudioCache audio;
  TextCache text;
};

Tensor forward_tracks(const FullModel& model, const FullExample& ex,
                      std::vector<TrackForward>* caches) {
  if (ex.tracks.empty()) throw DataError("playlist " + ex.id + " has no tracks");
  const std::size_t da = model.audio.output_size();
  const std::size_t ds = model.text.hidden_size();
  Tensor feats({ex.tracks.size(), da + ds});
  if (caches) caches->assign(ex.tracks.size(), {});
  for (std::size_t n = 0; n < ex.tracks.size(); ++n) {
    const auto& t = ex.tracks[n];
    const auto a = audio_summarize(model.audio, t.spectrogram,
                                   caches ? &(*caches)[n].audio : nullptr);
    const auto s = text_summarize(model.text, t.words,
                                  caches ? &(*caches)[n].text : nullptr);
    auto row = feats.row(n);
    std::copy(a.begin(), a.end(), row.begin());
    std::copy(s.begin(), s.end(), row.begin() + static_cast<std::ptrdiff_t>(da));
  }
  return feats;
}

}  // namespace

Tensor full_track_features(const FullModel& model, const FullExample& ex) {
  return forward_tracks(model, ex, nullptr);
}

FullLoss full_loss(const FullModel& model, const FullExample& ex,
                   double lambda, FullModel* grads) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  std::vector<TrackForward> caches;
  const Tensor feats = forward_tracks(model, ex, grads ? &caches : nullptr);

  FullLoss out;
  Tensor d_feats;
  out.caption = caption_loss(model.seq2seq, feats, ex.targets,
                             grads ? &grads->seq2seq : nullptr,
                             grads ? &d_feats : nullptr);
  out.total = out.caption;

  if (model.label_head) {
    const double weight = 1.0 / static_cast<double>(ex.tracks.size());
    for (std::size_t n = 0; n < ex.tracks.size(); ++n) {
      const auto& y = ex.tracks[n].labels;
      if (y.size() != model.label_head->output_size()) {
        throw DataError("playlist " + ex.id + " track " + std::to_string(n) +
                        ": expected " +
                        std::to_string(model.label_head->output_size()) +
                        " labels, found " + std::to_string(y.size()));
      }
      const auto probs = label_head_forward(*model.label_head, feats.row(n));
      const auto mt = multitask_loss(0.0, probs, y, lambda * weight);
      out.label += mt.label_loss * weight;
      if (grads) {
        std::vector<double> d_logits(probs.size());
        for (std::size_t l = 0; l < probs.size(); ++l) {
          d_logits[l] = mt.d_outputs[l] * probs[l] * (1.0 - probs[l]);
        }
        const auto d_feat = dense_backward(*model.label_head, feats.row(n),
                                           d_logits, *grads->label_head);
        linalg::add_to(d_feat, d_feats.row(n));
      }
    }
    out.total += lambda * out.label;
  }

  if (grads) {
    const std::size_t da = model.audio.output_size();
    for (std::size_t n = 0; n < ex.tracks.size(); ++n) {
      const auto row = d_feats.row(n);
      audio_summarize_backward(model.audio, caches[n].audio, row.first(da),
                               grads->audio);
      text_summarize_backward(model.text, caches[n].text, row.subspan(da),
                              grads->text);
    }
  }
  return out;
}

double mean_full_loss(const FullModel& model,
                      std::span<const FullExample> examples, double lambda) {
  if (examples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const auto& ex : examples) total += full_loss(model, ex, lambda).total;
  return total / static_cast<double>(examples.size());
}

FitReport fit_fully(FullModel& model, std::span<const FullExample> train,
                    std::span<const FullExample> validation,
                    const FitConfig& config, double lambda,
                    FullModel* final_params) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  return run_training(
      model, train, validation, config,
      [lambda](const FullModel& m, const FullExample& ex, FullModel& g) {
        return full_loss(m, ex, lambda, &g).total;
      },
      [lambda](const FullModel& m, std::span<const FullExample> exs) {
        return mean_full_loss(m, exs, lambda);
      },
      final_params);
}

}  // namespace musecap
