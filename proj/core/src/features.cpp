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

#include "musecap/features.hpp"

#include "musecap/errors.hpp"

namespace musecap {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                        : ch;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TrackFeature build_track_feature(std::span<const double> audio,
                                 std::size_t expected_audio_dim,
                                 std::string_view metadata,
                                 const EmbeddingTable& table) {
  require_same_size(audio.size(), expected_audio_dim, "audio feature");
  if (!all_finite(audio)) {
    throw NumericalError("audio feature contains non-finite values");
  }
  const auto tokens = tokenize(metadata);
  const BagEmbedding bag = bag_embedding(table, tokens);

  TrackFeature f;
  f.audio_dim = audio.size();
  f.no_known_words = bag.no_known_words();
  f.combined.reserve(audio.size() + bag.mean.size());
  f.combined.assign(audio.begin(), audio.end());
  f.combined.insert(f.combined.end(), bag.mean.begin(), bag.mean.end());
  return f;
}

PlaylistTarget build_playlist_target(std::string_view description,
                                     const EmbeddingTable& table,
                                     std::size_t max_len) {
  if (max_len < 1) throw ConfigError("max caption length must be >= 1");
  const auto eos = table.index_of(kEosToken);
  if (!eos) throw DataError("embedding table has no <eos> entry");

  PlaylistTarget out;
  std::vector<std::size_t> rows;
  for (auto& t : tokenize(description)) {
    const auto i = table.index_of(t);
    if (!i) {
      ++out.dropped;
      continue;
    }
    rows.push_back(*i);
    out.tokens.push_back(std::move(t));
  }
  if (rows.empty()) {
    throw DataError("description has no in-vocabulary words: \"" +
                    std::string(description) + "\"");
  }
  if (rows.size() > max_len - 1) {
    rows.resize(max_len - 1);
    out.tokens.resize(max_len - 1);
  }
  rows.push_back(*eos);
  out.tokens.emplace_back(kEosToken);

  std::vector<double> values;
  values.reserve(rows.size() * table.dim());
  for (std::size_t r : rows) {
    values.insert(values.end(), table.row(r).begin(), table.row(r).end());
  }
  out.embeddings = Tensor::matrix(rows.size(), table.dim(), std::move(values));
  return out;
}

Tensor stack_rows(std::span<const TrackFeature> tracks) {
  if (tracks.empty()) throw DataError("no tracks");
  const std::size_t d = tracks[0].combined.size();
  std::vector<double> values;
  values.reserve(tracks.size() * d);
  for (const auto& t : tracks) {
    require_same_size(t.combined.size(), d, "track feature");
    values.insert(values.end(), t.combined.begin(), t.combined.end());
  }
  return Tensor::matrix(tracks.size(), d, std::move(values));
}

}  // namespace musecap
