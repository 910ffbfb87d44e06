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

#ifndef MUSECAP_TOOLS_PIPELINE_HPP_
#define MUSECAP_TOOLS_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "musecap/checkpoint.hpp"
#include "musecap/data.hpp"
#include "musecap/embeddings.hpp"
#include "musecap/training.hpp"
#include "run_config.hpp"

namespace musecap::cli {

Modality required_modality(TrainingMode mode);

// Loads the embedding file and appends <eos>. A configured dimension that
// disagrees with the file is a ConfigError.
EmbeddingTable load_table(const std::string& path,
                          std::optional<std::size_t> expected_dim);

struct TrainOutcome {
  StoredModel stored;
  FitReport report;
  std::vector<std::string> train_ids, validation_ids;
};

// The stored model holds the best-validation parameters unless save_final
// is set, in which case it holds the parameters after the last epoch.
TrainOutcome train_model(const RunConfig& config, const EmbeddingTable& table,
                         const Manifest& manifest, bool save_final = false);

// Throws DataError when the table's vocabulary differs from the one the
// model was trained with.
void check_vocab(const StoredModel& stored, const EmbeddingTable& table);

// Restricts the manifest to one playlist; unknown ids are DataErrors.
Manifest select_playlist(const Manifest& manifest, const std::string& id);

struct Caption {
  std::string playlist_id;
  std::vector<std::string> tokens;
};

std::vector<Caption> caption_playlists(const StoredModel& stored,
                                       const Manifest& manifest,
                                       const EmbeddingTable& table,
                                       std::size_t max_len);

struct EvalMetrics {
  std::size_t playlists = 0;
  double mean_cosine_loss = 0.0;   // teacher forced
  double exact_match_rate = 0.0;   // greedy caption == description
  double token_agreement = 0.0;    // nearest word of each prediction
};

EvalMetrics evaluate(const StoredModel& stored, const Manifest& manifest,
                     const EmbeddingTable& table);

nlohmann::ordered_json to_json(const EvalMetrics& m);
EvalMetrics eval_metrics_from_json(const nlohmann::ordered_json& j);

}  // namespace musecap::cli

#endif  // MUSECAP_TOOLS_PIPELINE_HPP_
