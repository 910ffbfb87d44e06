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

#ifndef MUSECAP_CHECKPOINT_HPP_
#define MUSECAP_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "musecap/fully_train.hpp"
#include "musecap/seq2seq.hpp"
#include "musecap/tensor.hpp"

namespace musecap {

// Binary layout, all integers little-endian:
//   "MCAP" u8 version(=1)
//   u32 tensor count
//   per tensor: u16 name length, name (UTF-8), u8 rank, rank x u64 dims,
//               product(dims) x f64 values
//   u32 config length, config JSON (UTF-8)
inline constexpr std::string_view kCheckpointMagic = "MCAP";
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  std::string config_json;
};

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
// Structural validation only; throws FormatError.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint_bytes(std::string_view bytes);

enum class TrainingMode { kPretrainFeatures, kFullyTrain };

std::string_view to_string(TrainingMode mode);
TrainingMode parse_training_mode(std::string_view s);  // throws ConfigError

struct ModelConfig {
  TrainingMode mode = TrainingMode::kPretrainFeatures;
  // For kPretrainFeatures the encoder input is audio + embedding and
  // sentence/labels are unused.
  FullDims dims;
  std::uint64_t seed = 0;
  std::string vocab_hash;
  std::size_t max_caption_len = 16;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view json);  // kBadConfig

struct StoredModel {
  ModelConfig config;
  std::variant<Seq2SeqModel, FullModel> model;
};

Checkpoint to_checkpoint(const StoredModel& stored);
// Checks every tensor against the shapes implied by the config: missing,
// unknown, duplicate and mis-shaped tensors are FormatErrors.
StoredModel from_checkpoint(const Checkpoint& ckpt);

void save_model(const StoredModel& stored, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

}  // namespace musecap

#endif  // MUSECAP_CHECKPOINT_HPP_
