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

#ifndef MUSECAP_DATA_HPP_
#define MUSECAP_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "musecap/embeddings.hpp"
#include "musecap/fully_train.hpp"
#include "musecap/training.hpp"

namespace musecap {

struct TrackEntry {
  std::string id;
  std::string metadata;
  std::optional<std::string> audio_feature_path;  // as written in the JSON
  std::optional<std::string> spectrogram_path;
  std::optional<std::vector<double>> labels;

  // Payloads loaded from the referenced files.
  std::optional<std::vector<double>> audio;
  std::optional<Spectrogram> spectrogram;

  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

struct PlaylistEntry {
  std::string id;
  std::string description;
  std::vector<TrackEntry> tracks;

  friend bool operator==(const PlaylistEntry&, const PlaylistEntry&) = default;
};

struct Manifest {
  std::vector<PlaylistEntry> playlists;
  std::filesystem::path base_dir;  // relative paths resolve against this

  const PlaylistEntry* find(std::string_view playlist_id) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Which per-track file every track must reference.
enum class Modality { kAny, kAudioFeatures, kSpectrograms };

// Parses, validates and loads every referenced file. Schema problems are
// DataErrors whose message starts with the JSON path of the field.
Manifest load_manifest(const std::filesystem::path& path,
                       Modality required = Modality::kAny);
Manifest parse_manifest(std::string_view json_text,
                        const std::filesystem::path& base_dir,
                        Modality required = Modality::kAny);
std::string manifest_to_json(const Manifest& manifest);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Audio feature sidecar: matrix text format with a single row.
std::vector<double> load_audio_feature_file(const std::filesystem::path& path);
void write_audio_feature_file(std::span<const double> values,
                              const std::filesystem::path& path);

struct ManifestSplit {
  Manifest train;
  Manifest validation;
};

// Seeded shuffle of playlists; validation gets max(1, round(fraction * P))
// playlists (at most P - 1). Both sides keep manifest order.
ManifestSplit split(const Manifest& manifest, double validation_fraction,
                    std::uint64_t seed);

struct SynthOptions {
  std::uint64_t seed = 42;
  std::size_t playlists = 4;
  std::size_t tracks_per_playlist = 3;
  std::vector<std::string> vocab;  // empty: built-in music vocabulary
  std::size_t audio_dim = 50;
  std::size_t embedding_dim = 300;
  std::size_t bands = kDefaultBands;
  std::size_t frames = 16;
  std::size_t labels = 0;
  std::size_t min_caption = 3;
  std::size_t max_caption = 5;
};

const std::vector<std::string>& default_synth_vocab();

struct SynthResult {
  Manifest manifest;
  EmbeddingTable embeddings;  // without <eos>
};

// Writes manifest.json, embeddings.txt, audio/*.vec and spectrograms/*.spec
// under out_dir. Each caption token adds a fixed pseudo-random offset to the
// audio features and a band profile to the spectrograms of its playlist's
// tracks, so captions are recoverable from the inputs.
SynthResult synthesize(const SynthOptions& options,
                       const std::filesystem::path& out_dir);

// Pre-computed-feature examples: every track needs an audio vector of
// audio_dim values. `table` must contain <eos>.
std::vector<CaptionExample> build_caption_examples(const Manifest& manifest,
                                                   const EmbeddingTable& table,
                                                   std::size_t audio_dim,
                                                   std::size_t max_caption_len);

// Fully-training examples: every track needs a spectrogram and at least one
// in-vocabulary metadata word ("missing modality" DataError otherwise).
std::vector<FullExample> build_full_examples(const Manifest& manifest,
                                             const EmbeddingTable& table,
                                             std::size_t max_caption_len);

}  // namespace musecap

#endif  // MUSECAP_DATA_HPP_
