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

#ifndef MUSECAP_FULLY_TRAIN_HPP_
#define MUSECAP_FULLY_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musecap/dense.hpp"
#include "musecap/gru.hpp"
#include "musecap/seq2seq.hpp"
#include "musecap/tensor.hpp"
#include "musecap/training.hpp"

namespace musecap {

inline constexpr std::size_t kDefaultBands = 48;
inline constexpr std::size_t kConv1Channels = 8;
inline constexpr std::size_t kConv2Channels = 16;
inline constexpr double kLabelClamp = 1e-7;

// Frequency x time matrix (bands x frames), finite entries.
class Spectrogram {
 public:
  explicit Spectrogram(Tensor values);
  std::size_t bands() const { return values_.rows(); }
  std::size_t frames() const { return values_.cols(); }
  const Tensor& values() const { return values_; }

  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;

 private:
  Tensor values_;
};

// Text format "F T" then F lines of T reals.
Spectrogram parse_spectrogram(std::istream& in);
Spectrogram load_spectrogram_file(const std::filesystem::path& path);
void write_spectrogram_file(const Spectrogram& s,
                            const std::filesystem::path& path);

// Channel-major feature map: data[(c * height + i) * width + j].
struct FeatureMap {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<double> data;

  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data[(c * height + i) * width + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data[(c * height + i) * width + j];
  }
};

// 2x2 stride-2 max pool (floor). argmax[k] is the flat input index chosen
// for output k; ties go to the lowest row-major position in the window.
FeatureMap maxpool2x2_forward(const FeatureMap& in,
                              std::vector<std::size_t>* argmax);
FeatureMap maxpool2x2_backward(const FeatureMap& d_out,
                               std::span<const std::size_t> argmax,
                               std::size_t channels, std::size_t height,
                               std::size_t width);

// conv3x3(same) -> ReLU -> maxpool2x2, twice, then global average pool and a
// dense 16 -> D_a layer.
struct AudioSummarizerParams {
  Tensor conv1_w;  // 8 x 1 x 3 x 3
  Tensor conv1_b;  // 8
  Tensor conv2_w;  // 16 x 8 x 3 x 3
  Tensor conv2_b;  // 16
  DenseParams out;  // 16 -> D_a

  static AudioSummarizerParams zeros(std::size_t audio_dim);
  static AudioSummarizerParams initialized(std::size_t audio_dim,
                                           std::uint64_t seed,
                                           const std::string& prefix);
  std::size_t output_size() const { return out.output_size(); }

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
    f(p + "conv1.weight", s.conv1_w);
    f(p + "conv1.bias", s.conv1_b);
    f(p + "conv2.weight", s.conv2_w);
    f(p + "conv2.bias", s.conv2_b);
    s.out.visit_params(p + "dense.", f);
  }
};

struct AudioCache {
  FeatureMap input, pre1, pool1, pre2;
  std::vector<std::size_t> arg1, arg2;
  std::size_t pool2_h = 0, pool2_w = 0;
  std::vector<double> pooled;  // global average, one per channel
};

// Requires bands, frames >= 4. Throws DataError otherwise.
std::vector<double> audio_summarize(const AudioSummarizerParams& p,
                                    const Spectrogram& spec,
                                    AudioCache* cache = nullptr);
// Accumulates parameter gradients.
void audio_summarize_backward(const AudioSummarizerParams& p,
                              const AudioCache& cache,
                              std::span<const double> d_out,
                              AudioSummarizerParams& grads);

// Single-layer GRU over K word embeddings; the final state is the sentence
// vector.
struct TextCache {
  std::vector<GruCache> steps;
};
std::vector<double> text_summarize(const GruParams& p, const Tensor& words,
                                   TextCache* cache = nullptr);
// Returns dL/d words (K x D_w).
Tensor text_summarize_backward(const GruParams& p, const TextCache& cache,
                               std::span<const double> d_sentence,
                               GruParams& grads);

// Logistic outputs of the label head.
std::vector<double> label_head_forward(const DenseParams& head,
                                       std::span<const double> feature);

struct MultitaskLoss {
  double total = 0.0;
  double label_loss = 0.0;         // BCE
  std::vector<double> d_outputs;   // d total / d outputs
};

// total = caption_loss + lambda * BCE(outputs, labels), outputs clamped to
// [1e-7, 1 - 1e-7] before the logs.
MultitaskLoss multitask_loss(double caption_loss,
                             std::span<const double> outputs,
                             std::span<const double> labels, double lambda);

struct FullDims {
  std::size_t audio = 50;
  std::size_t embedding = 300;
  std::size_t hidden = 256;
  std::size_t sentence = 300;
  std::size_t labels = 0;  // 0: no label head

  friend bool operator==(const FullDims&, const FullDims&) = default;
};

struct FullModel {
  AudioSummarizerParams audio;
  GruParams text;
  std::optional<DenseParams> label_head;
  Seq2SeqModel seq2seq;

  static FullModel initialized(const FullDims& dims, std::uint64_t seed);
  FullDims dims() const;

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
    s.audio.visit_params(p + "audio.", f);
    s.text.visit_params(p + "text.", f);
    if (s.label_head) s.label_head->visit_params(p + "label_head.", f);
    s.seq2seq.visit_params(p, f);
  }
};

struct FullTrack {
  Spectrogram spectrogram;
  Tensor words;                // K x D_w metadata embeddings, K >= 1
  std::vector<double> labels;  // empty when unlabeled
};

struct FullExample {
  std::string id;
  std::vector<FullTrack> tracks;
  Tensor targets;
  std::vector<std::string> target_tokens;
};

// Track features [audio_summarize ; text_summarize] stacked as N x (D_a+D_s).
Tensor full_track_features(const FullModel& model, const FullExample& ex);

struct FullLoss {
  double total = 0.0;
  double caption = 0.0;
  double label = 0.0;  // mean BCE over tracks
};

// Caption loss plus lambda times the per-track label loss averaged over
// tracks (when the model has a label head). Accumulates every gradient when
// grads != nullptr.
FullLoss full_loss(const FullModel& model, const FullExample& ex,
                   double lambda, FullModel* grads = nullptr);

double mean_full_loss(const FullModel& model,
                      std::span<const FullExample> examples, double lambda);

FitReport fit_fully(FullModel& model, std::span<const FullExample> train,
                    std::span<const FullExample> validation,
                    const FitConfig& config, double lambda,
                    FullModel* final_params = nullptr);

}  // namespace musecap

#endif  // MUSECAP_FULLY_TRAIN_HPP_
