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

#include "musecap/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "musecap/errors.hpp"
#include "musecap/features.hpp"
#include "musecap/random.hpp"
#include "musecap/text_format.hpp"

namespace musecap {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& where,
                               const std::string& what) {
  throw DataError("manifest " + where + ": " + what);
}

const ojson& require_field(const ojson& obj, const char* key,
                           const std::string& where) {
  if (!obj.contains(key)) schema_error(where, std::string("missing \"") + key + "\"");
  return obj.at(key);
}

std::string require_string(const ojson& obj, const char* key,
                           const std::string& where) {
  const auto& v = require_field(obj, key, where);
  if (!v.is_string()) {
    schema_error(where + "." + key, "expected a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const ojson& obj, const char* key,
                                           const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_string()) {
    schema_error(where + "." + key, "expected a string");
  }
  return obj.at(key).get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void load_payloads(TrackEntry& t, const std::filesystem::path& base,
                   const std::string& where) {
  if (t.audio_feature_path) {
    const auto full = resolve(base, *t.audio_feature_path);
    if (!std::filesystem::is_regular_file(full)) {
      schema_error(where + ".audio_feature_path",
                   "dangling reference to " + full.string());
    }
    t.audio = load_audio_feature_file(full);
  }
  if (t.spectrogram_path) {
    const auto full = resolve(base, *t.spectrogram_path);
    if (!std::filesystem::is_regular_file(full)) {
      schema_error(where + ".spectrogram_path",
                   "dangling reference to " + full.string());
    }
    t.spectrogram = load_spectrogram_file(full);
  }
}

}  // namespace

const PlaylistEntry* Manifest::find(std::string_view playlist_id) const {
  for (const auto& p : playlists) {
    if (p.id == playlist_id) return &p;
  }
  return nullptr;
}

std::vector<double> load_audio_feature_file(const std::filesystem::path& path) {
  const Tensor m = textfmt::parse_matrix_file(path);
  if (m.rows() != 1) {
    throw FormatError(FormatCode::kRowCount, 1,
                      path.string() + ": audio feature file must have 1 row");
  }
  return m.raw();
}

void write_audio_feature_file(std::span<const double> values,
                              const std::filesystem::path& path) {
  textfmt::write_matrix_file(
      Tensor::matrix(1, values.size(),
                     std::vector<double>(values.begin(), values.end())),
      path);
}

Manifest parse_manifest(std::string_view json_text,
                        const std::filesystem::path& base_dir,
                        Modality required) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const std::exception& e) {
    throw DataError(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("$", "expected an object");
  const auto& lists = require_field(doc, "playlists", "$");
  if (!lists.is_array()) schema_error("$.playlists", "expected an array");

  Manifest m;
  m.base_dir = base_dir;
  std::set<std::string> playlist_ids;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const auto& pj = lists[i];
    std::string where = "playlists[" + std::to_string(i) + "]";
    if (!pj.is_object()) schema_error(where, "expected an object");
    PlaylistEntry p;
    p.id = require_string(pj, "id", where);
    if (p.id.empty()) schema_error(where + ".id", "empty id");
    where += " (playlist '" + p.id + "')";
    if (!playlist_ids.insert(p.id).second) {
      schema_error(where, "duplicate playlist id");
    }
    if (!pj.contains("description")) {
      schema_error(where, "missing \"description\"");
    }
    p.description = require_string(pj, "description", where);
    if (p.description.find_first_not_of(" \t\r\n") == std::string::npos) {
      schema_error(where + ".description", "empty description");
    }
    const auto& tracks = require_field(pj, "tracks", where);
    if (!tracks.is_array() || tracks.empty()) {
      schema_error(where + ".tracks", "expected a non-empty array");
    }
    std::set<std::string> track_ids;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      const auto& tj = tracks[k];
      const std::string tw = where + ".tracks[" + std::to_string(k) + "]";
      if (!tj.is_object()) schema_error(tw, "expected an object");
      TrackEntry t;
      t.id = require_string(tj, "id", tw);
      if (t.id.empty()) schema_error(tw + ".id", "empty id");
      if (!track_ids.insert(t.id).second) {
        schema_error(tw, "duplicate track id '" + t.id + "'");
      }
      t.metadata = require_string(tj, "metadata", tw);
      t.audio_feature_path = optional_string(tj, "audio_feature_path", tw);
      t.spectrogram_path = optional_string(tj, "spectrogram_path", tw);
      if (tj.contains("labels") && !tj.at("labels").is_null()) {
        const auto& lj = tj.at("labels");
        if (!lj.is_array()) schema_error(tw + ".labels", "expected an array");
        std::vector<double> labels;
        for (const auto& v : lj) {
          if (!v.is_number()) {
            schema_error(tw + ".labels", "expected numbers");
          }
          const double y = v.get<double>();
          if (!(y >= 0.0 && y <= 1.0)) {
            schema_error(tw + ".labels", "values must lie in [0, 1]");
          }
          labels.push_back(y);
        }
        t.labels = std::move(labels);
      }
      if (required == Modality::kAudioFeatures && !t.audio_feature_path) {
        schema_error(tw, "missing \"audio_feature_path\"");
      }
      if (required == Modality::kSpectrograms && !t.spectrogram_path) {
        schema_error(tw, "missing \"spectrogram_path\"");
      }
      load_payloads(t, base_dir, tw);
      p.tracks.push_back(std::move(t));
    }
    m.playlists.push_back(std::move(p));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, Modality required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_manifest(text, path.parent_path(), required);
}

std::string manifest_to_json(const Manifest& manifest) {
  ojson doc;
  doc["playlists"] = ojson::array();
  for (const auto& p : manifest.playlists) {
    ojson pj;
    pj["id"] = p.id;
    pj["description"] = p.description;
    pj["tracks"] = ojson::array();
    for (const auto& t : p.tracks) {
      ojson tj;
      tj["id"] = t.id;
      tj["metadata"] = t.metadata;
      if (t.audio_feature_path) tj["audio_feature_path"] = *t.audio_feature_path;
      if (t.spectrogram_path) tj["spectrogram_path"] = *t.spectrogram_path;
      if (t.labels) tj["labels"] = *t.labels;
      pj["tracks"].push_back(std::move(tj));
    }
    doc["playlists"].push_back(std::move(pj));
  }
  return doc.dump(2) + "\n";
}

void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << manifest_to_json(manifest);
  if (!out) throw DataError("write failed: " + path.string());
}

ManifestSplit split(const Manifest& manifest, double validation_fraction,
                    std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
  const std::size_t total = manifest.playlists.size();
  if (total < 2) throw DataError("split needs at least 2 playlists");

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(std::span<std::size_t>(order));

  std::size_t n_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(total)));
  n_val = std::clamp<std::size_t>(n_val, 1, total - 1);

  std::vector<bool> is_val(total, false);
  for (std::size_t k = 0; k < n_val; ++k) is_val[order[k]] = true;

  ManifestSplit out;
  out.train.base_dir = out.validation.base_dir = manifest.base_dir;
  for (std::size_t i = 0; i < total; ++i) {
    (is_val[i] ? out.validation : out.train)
        .playlists.push_back(manifest.playlists[i]);
  }
  return out;
}

const std::vector<std::string>& default_synth_vocab() {
  static const std::vector<std::string> vocab = {
      "dramatic",  "motivating", "intense",    "epic",        "action",
      "adventure", "soaring",    "gloriously", "chilled",     "acoustic",
      "relax",     "think",      "dream",      "love",        "songs",
      "ballads",   "emotional",  "upbeat",     "dark",        "ambient",
      "piano",     "strings",    "guitar",     "drums",       "electronic",
      "mellow",    "uplifting",  "cinematic",  "tense",       "playful",
      "romantic",  "nostalgic",  "energetic",  "calm",        "melancholic",
      "bright",    "groovy",     "funky",      "jazz",        "orchestral",
      "minimal",   "warm",       "haunting",   "driving",     "gentle",
      "majestic",  "quirky",     "sparse"};
  return vocab;
}

namespace {

std::string padded_id(char prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return std::string(1, prefix) + digits;
}

std::vector<double> normal_vector(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

SynthResult synthesize(const SynthOptions& o,
                       const std::filesystem::path& out_dir) {
  const auto& vocab = o.vocab.empty() ? default_synth_vocab() : o.vocab;
  if (vocab.empty()) throw ConfigError("synthesize: empty vocabulary");
  for (const auto& w : vocab) {
    if (tokenize(w) != std::vector<std::string>{w}) {
      throw ConfigError("synthesize: vocabulary word '" + w +
                        "' is not a normalized token");
    }
  }
  if (o.playlists == 0 || o.tracks_per_playlist == 0 || o.audio_dim == 0 ||
      o.embedding_dim == 0 || o.bands < 4 || o.frames < 4 ||
      o.min_caption == 0 || o.min_caption > o.max_caption) {
    throw ConfigError("synthesize: invalid sizes");
  }
  if (o.max_caption > vocab.size()) {
    throw ConfigError("synthesize: caption length exceeds vocabulary size");
  }

  // Embedding table: one seeded normal vector per word.
  std::vector<double> emb;
  emb.reserve(vocab.size() * o.embedding_dim);
  for (const auto& w : vocab) {
    const auto v = normal_vector(derive_seed(o.seed, "embedding:" + w),
                                 o.embedding_dim);
    emb.insert(emb.end(), v.begin(), v.end());
  }
  EmbeddingTable table(vocab, Tensor::matrix(vocab.size(), o.embedding_dim,
                                             std::move(emb)));

  std::filesystem::create_directories(out_dir / "audio");
  std::filesystem::create_directories(out_dir / "spectrograms");

  Rng rng(derive_seed(o.seed, "playlists"));
  std::set<std::vector<std::size_t>> used_captions;
  Manifest manifest;
  manifest.base_dir = out_dir;
  for (std::size_t p = 0; p < o.playlists; ++p) {
    std::vector<std::size_t> caption;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const std::size_t len =
          o.min_caption + rng.below(o.max_caption - o.min_caption + 1);
      std::vector<std::size_t> pool(vocab.size());
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(pool));
      caption.assign(pool.begin(), pool.begin() + static_cast<long>(len));
      if (used_captions.insert(caption).second) break;
      caption.clear();
    }
    if (caption.empty()) {
      throw ConfigError("synthesize: cannot draw distinct captions");
    }

    PlaylistEntry entry;
    entry.id = padded_id('p', p, 3);
    for (std::size_t k = 0; k < caption.size(); ++k) {
      if (k) entry.description += ' ';
      entry.description += vocab[caption[k]];
    }

    // Per-playlist signal shared by all its tracks.
    std::vector<double> audio_signal(o.audio_dim, 0.0);
    std::vector<double> band_signal(o.bands, 0.0);
    for (std::size_t w : caption) {
      linalg::add_to(normal_vector(derive_seed(o.seed, "offset:" + vocab[w]),
                                   o.audio_dim),
                     audio_signal);
      linalg::add_to(normal_vector(derive_seed(o.seed, "bands:" + vocab[w]),
                                   o.bands),
                     band_signal);
    }
    std::vector<double> labels;
    for (std::size_t l = 0; l < o.labels; ++l) {
      const bool present = l < vocab.size() &&
                           std::find(caption.begin(), caption.end(), l) !=
                               caption.end();
      labels.push_back(present ? 1.0 : 0.0);
    }

    for (std::size_t t = 0; t < o.tracks_per_playlist; ++t) {
      TrackEntry track;
      track.id = padded_id('t', t, 2);
      const std::string stem = entry.id + "_" + track.id;

      // metadata: two caption words and one random vocabulary word
      std::vector<std::string> words;
      for (int k = 0; k < 2; ++k) {
        words.push_back(vocab[caption[rng.below(caption.size())]]);
      }
      words.push_back(vocab[rng.below(vocab.size())]);
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (k) track.metadata += ' ';
        track.metadata += words[k];
      }

      std::vector<double> audio(o.audio_dim);
      for (std::size_t i = 0; i < o.audio_dim; ++i) {
        audio[i] = audio_signal[i] + 0.3 * rng.normal();
      }
      Tensor spec({o.bands, o.frames});
      for (std::size_t f = 0; f < o.bands; ++f) {
        for (std::size_t j = 0; j < o.frames; ++j) {
          spec(f, j) = band_signal[f] + 0.3 * rng.normal();
        }
      }

      track.audio_feature_path = "audio/" + stem + ".vec";
      track.spectrogram_path = "spectrograms/" + stem + ".spec";
      write_audio_feature_file(audio, out_dir / *track.audio_feature_path);
      Spectrogram s(std::move(spec));
      write_spectrogram_file(s, out_dir / *track.spectrogram_path);
      // keep exactly what a reader would parse back
      track.audio = load_audio_feature_file(out_dir / *track.audio_feature_path);
      track.spectrogram =
          load_spectrogram_file(out_dir / *track.spectrogram_path);
      if (o.labels > 0) track.labels = labels;
      entry.tracks.push_back(std::move(track));
    }
    manifest.playlists.push_back(std::move(entry));
  }

  write_manifest(manifest, out_dir / "manifest.json");
  write_embedding_file(table, out_dir / "embeddings.txt");
  return SynthResult{std::move(manifest), std::move(table)};
}

std::vector<CaptionExample> build_caption_examples(const Manifest& manifest,
                                                   const EmbeddingTable& table,
                                                   std::size_t audio_dim,
                                                   std::size_t max_caption_len) {
  std::vector<CaptionExample> out;
  out.reserve(manifest.playlists.size());
  for (const auto& p : manifest.playlists) {
    std::vector<TrackFeature> feats;
    for (const auto& t : p.tracks) {
      if (!t.audio) {
        throw DataError("playlist '" + p.id + "' track '" + t.id +
                        "': missing modality (no audio feature)");
      }
      try {
        feats.push_back(build_track_feature(*t.audio, audio_dim, t.metadata,
                                            table));
      } catch (const DimensionError& e) {
        throw DataError("playlist '" + p.id + "' track '" + t.id +
                        "': " + e.what());
      }
    }
    auto target = build_playlist_target(p.description, table, max_caption_len);
    out.push_back(CaptionExample{p.id, stack_rows(feats),
                                 std::move(target.embeddings),
                                 std::move(target.tokens)});
  }
  return out;
}

std::vector<FullExample> build_full_examples(const Manifest& manifest,
                                             const EmbeddingTable& table,
                                             std::size_t max_caption_len) {
  std::vector<FullExample> out;
  out.reserve(manifest.playlists.size());
  for (const auto& p : manifest.playlists) {
    FullExample ex;
    ex.id = p.id;
    for (const auto& t : p.tracks) {
      const std::string where = "playlist '" + p.id + "' track '" + t.id + "'";
      if (!t.spectrogram) {
        throw DataError(where + ": missing modality (no spectrogram)");
      }
      std::vector<double> words;
      std::size_t k = 0;
      for (const auto& tok : tokenize(t.metadata)) {
        if (const auto v = table.lookup(tok)) {
          words.insert(words.end(), v->begin(), v->end());
          ++k;
        }
      }
      if (k == 0) {
        throw DataError(where +
                        ": missing modality (no in-vocabulary metadata words)");
      }
      ex.tracks.push_back(FullTrack{
          *t.spectrogram, Tensor::matrix(k, table.dim(), std::move(words)),
          t.labels.value_or(std::vector<double>{})});
    }
    auto target = build_playlist_target(p.description, table, max_caption_len);
    ex.targets = std::move(target.embeddings);
    ex.target_tokens = std::move(target.tokens);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace musecap
