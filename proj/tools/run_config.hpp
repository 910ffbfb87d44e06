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

#ifndef MUSECAP_TOOLS_RUN_CONFIG_HPP_
#define MUSECAP_TOOLS_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "musecap/adam.hpp"
#include "musecap/checkpoint.hpp"

namespace musecap::cli {

struct RunConfig {
  TrainingMode mode = TrainingMode::kPretrainFeatures;

  struct Dims {
    std::size_t audio = 50;
    std::optional<std::size_t> embedding;  // null: taken from the file
    std::size_t hidden = 256;
    std::optional<std::size_t> sentence;   // null: same as embedding
    std::size_t labels = 0;
  } dims;

  AdamConfig optimizer;

  struct Training {
    std::size_t epochs = 100;
    std::optional<std::size_t> patience = 10;  // null: no early stopping
    std::uint64_t seed = 0;
    double validation_fraction = 0.2;
    std::size_t max_caption_len = 16;
    double lambda = 1.0;
  } training;

  struct Paths {
    std::string embeddings;
    std::string manifest;
    std::string checkpoint_out = "model.mcap";
    std::string report_out;  // empty: <checkpoint_out>.report.json
  } paths;
};

nlohmann::ordered_json to_json(const RunConfig& config);

// Missing keys keep their defaults; unknown keys and invalid values are
// ConfigErrors. Relative paths are resolved against base_dir.
RunConfig run_config_from_json(const nlohmann::ordered_json& j,
                               const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Throws ConfigError on any invariant violation.
void validate(const RunConfig& config);

}  // namespace musecap::cli

#endif  // MUSECAP_TOOLS_RUN_CONFIG_HPP_
