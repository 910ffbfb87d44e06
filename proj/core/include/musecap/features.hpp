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

#ifndef MUSECAP_FEATURES_HPP_
#define MUSECAP_FEATURES_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musecap/embeddings.hpp"
#include "musecap/tensor.hpp"

namespace musecap {

// Lowercases ASCII and splits on every byte that is not a letter, digit or
// underscore. Bytes >= 0x80 count as letters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

// Per-track input t = [t_a ; t_w].
struct TrackFeature {
  std::vector<double> combined;
  std::size_t audio_dim = 0;
  bool no_known_words = false;  // metadata had no in-vocabulary token

  std::span<const double> audio() const {
    return std::span<const double>(combined).first(audio_dim);
  }
  std::span<const double> words() const {
    return std::span<const double>(combined).subspan(audio_dim);
  }
};

// Throws DimensionError if |audio| != expected_audio_dim and
// NumericalError on non-finite audio values.
TrackFeature build_track_feature(std::span<const double> audio,
                                 std::size_t expected_audio_dim,
                                 std::string_view metadata,
                                 const EmbeddingTable& table);

struct PlaylistTarget {
  std::vector<std::string> tokens;  // ends with kEosToken
  Tensor embeddings;                // tokens.size() x dim
  std::size_t dropped = 0;          // out-of-vocabulary tokens removed
};

// Tokenize, drop OOV, truncate to max_len - 1, append <eos>. The table must
// contain kEosToken. Throws DataError when no token is in vocabulary.
PlaylistTarget build_playlist_target(std::string_view description,
                                     const EmbeddingTable& table,
                                     std::size_t max_len);

// Stacks rows into an N x D matrix.
Tensor stack_rows(std::span<const TrackFeature> tracks);

}  // namespace musecap

#endif  // MUSECAP_FEATURES_HPP_
