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

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "corrupt_fixtures.hpp"
#include "musecap/data.hpp"
#include "musecap/embeddings.hpp"
#include "musecap/errors.hpp"
#include "test_support.hpp"

namespace musecap {
namespace {

using testing::TempDir;

std::string error_of(const std::string& json) {
  try {
    parse_manifest(json, ".");
  } catch (const DataError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << json;
  return {};
}

Manifest numbered(std::size_t n) {
  Manifest m;
  for (std::size_t i = 0; i < n; ++i) {
    m.playlists.push_back({"p" + std::to_string(i), "calm piano",
                           {TrackEntry{"t", "x", {}, {}, {}, {}, {}}}});
  }
  return m;
}

TEST(Manifest, ParsesMinimalDocument) {
  const Manifest m = parse_manifest(
      R"({"playlists":[{"id":"a","description":"calm piano",
          "tracks":[{"id":"t1","metadata":"Song","labels":[0,1]}]}]})",
      "/base");
  ASSERT_EQ(m.playlists.size(), 1u);
  EXPECT_EQ(m.playlists[0].description, "calm piano");
  EXPECT_EQ(m.playlists[0].tracks[0].labels, (std::vector<double>{0, 1}));
  EXPECT_EQ(m.find("a"), &m.playlists[0]);
  EXPECT_EQ(m.find("b"), nullptr);
}

TEST(Manifest, MissingDescriptionNamesPlaylist) {
  const std::string msg = error_of(
      R"({"playlists":[{"id":"road-trip","tracks":[{"id":"t","metadata":""}]}]})");
  EXPECT_NE(msg.find("road-trip"), std::string::npos) << msg;
  EXPECT_NE(msg.find("description"), std::string::npos) << msg;
}

TEST(Manifest, SchemaErrors) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"[]", "$"},
      {"{", "invalid JSON"},
      {R"({"playlists":{}})", "$.playlists"},
      {R"({"playlists":[{"id":"a","description":"x","tracks":[]}]})", "tracks"},
      {R"({"playlists":[{"id":"a","description":"  ","tracks":[{"id":"t","metadata":""}]}]})",
       "empty description"},
      {R"({"playlists":[{"id":"a","description":"x","tracks":[{"id":"t","metadata":""}]},
                        {"id":"a","description":"x","tracks":[{"id":"t","metadata":""}]}]})",
       "duplicate playlist id"},
      {R"({"playlists":[{"id":"a","description":"x","tracks":[{"id":"t","metadata":""},
                                                               {"id":"t","metadata":""}]}]})",
       "duplicate track id"},
      {R"({"playlists":[{"id":"a","description":"x","tracks":[{"id":"t","metadata":"","labels":[2]}]}]})",
       "[0, 1]"},
      {R"({"playlists":[{"id":"a","description":"x","tracks":[{"id":"t","metadata":"",
          "audio_feature_path":"nope.vec"}]}]})",
       "dangling reference"},
  };
  for (const auto& [json, needle] : cases) {
    const std::string msg = error_of(json);
    EXPECT_NE(msg.find(needle), std::string::npos) << json << " -> " << msg;
  }
}

TEST(Manifest, RequiredModalityIsEnforced) {
  const std::string json =
      R"({"playlists":[{"id":"a","description":"x","tracks":[{"id":"t","metadata":""}]}]})";
  EXPECT_THROW(parse_manifest(json, ".", Modality::kAudioFeatures), DataError);
  EXPECT_THROW(parse_manifest(json, ".", Modality::kSpectrograms), DataError);
  EXPECT_NO_THROW(parse_manifest(json, ".", Modality::kAny));
}

TEST(Manifest, JsonRoundTrip) {
  TempDir dir("manifest");
  SynthOptions o;
  o.playlists = 3;
  o.labels = 2;
  o.embedding_dim = 8;
  o.audio_dim = 4;
  const SynthResult s = synthesize(o, dir.path());
  const Manifest loaded = load_manifest(dir / "manifest.json");
  EXPECT_EQ(loaded, s.manifest);
  const Manifest again =
      parse_manifest(manifest_to_json(loaded), loaded.base_dir);
  EXPECT_EQ(again, loaded);
}

TEST(Split, TenPlaylistsAtTwentyPercent) {
  const ManifestSplit s = split(numbered(10), 0.2, 1);
  EXPECT_EQ(s.train.playlists.size(), 8u);
  EXPECT_EQ(s.validation.playlists.size(), 2u);
}

TEST(Split, IsADeterministicPartitionKeepingOrder) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Manifest m = numbered(7);
    const ManifestSplit s = split(m, 0.3, seed);
    std::vector<std::string> all;
    for (const auto& p : s.train.playlists) all.push_back(p.id);
    for (const auto& p : s.validation.playlists) all.push_back(p.id);
    ASSERT_EQ(all.size(), 7u);
    EXPECT_EQ(std::set<std::string>(all.begin(), all.end()).size(), 7u);
    auto ordered = [](const Manifest& part) {
      return std::is_sorted(part.playlists.begin(), part.playlists.end(),
                            [](const auto& a, const auto& b) { return a.id < b.id; });
    };
    EXPECT_TRUE(ordered(s.train));
    EXPECT_TRUE(ordered(s.validation));
    EXPECT_EQ(s.validation.playlists.size(), 2u);
    EXPECT_EQ(split(m, 0.3, seed).validation, s.validation);
  }
}

TEST(Split, Bounds) {
  EXPECT_EQ(split(numbered(2), 0.01, 0).validation.playlists.size(), 1u);
  EXPECT_EQ(split(numbered(2), 0.99, 0).train.playlists.size(), 1u);
  EXPECT_THROW(split(numbered(1), 0.5, 0), DataError);
  EXPECT_THROW(split(numbered(4), 0.0, 0), ConfigError);
  EXPECT_THROW(split(numbered(4), 1.0, 0), ConfigError);
}

TEST(Synth, IsByteDeterministic) {
  TempDir a("synth_a"), b("synth_b");
  SynthOptions o;
  o.embedding_dim = 12;
  o.labels = 3;
  synthesize(o, a.path());
  synthesize(o, b.path());
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a.path());
    EXPECT_EQ(testing::read_file_bytes(entry.path()),
              testing::read_file_bytes(b.path() / rel))
        << rel;
  }
  o.seed = 43;
  TempDir c("synth_c");
  synthesize(o, c.path());
  EXPECT_NE(testing::read_file_bytes(a / "manifest.json"),
            testing::read_file_bytes(c / "manifest.json"));
}

TEST(Synth, DefaultCorpusHas350DimensionalTrackFeatures) {
  TempDir dir("synth350");
  const SynthResult s = synthesize(SynthOptions{}, dir.path());
  const EmbeddingTable table = with_eos(load_embedding_file(dir / "embeddings.txt"));
  const Manifest m = load_manifest(dir / "manifest.json", Modality::kAudioFeatures);
  const auto examples = build_caption_examples(m, table, 50, 16);
  ASSERT_EQ(examples.size(), s.manifest.playlists.size());
  for (const auto& ex : examples) {
    EXPECT_EQ(ex.tracks.cols(), 350u) << ex.id;
    EXPECT_EQ(ex.targets.cols(), 300u);
    EXPECT_EQ(ex.target_tokens.back(), kEosToken);
  }
}

TEST(Examples, MissingModalityIsReported) {
  TempDir dir("modality");
  SynthOptions o;
  o.embedding_dim = 6;
  o.audio_dim = 4;
  const SynthResult s = synthesize(o, dir.path());
  const EmbeddingTable table = with_eos(s.embeddings);

  Manifest no_audio = s.manifest;
  no_audio.playlists[1].tracks[0].audio.reset();
  try {
    build_caption_examples(no_audio, table, 4, 8);
    ADD_FAILURE();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing modality"), std::string::npos);
  }
  EXPECT_THROW(build_caption_examples(s.manifest, table, 5, 8), DataError);

  Manifest no_spec = s.manifest;
  no_spec.playlists[0].tracks[1].spectrogram.reset();
  EXPECT_THROW(build_full_examples(no_spec, table, 8), DataError);

  Manifest no_words = s.manifest;
  no_words.playlists[0].tracks[0].metadata = "zzz qqq";
  EXPECT_THROW(build_full_examples(no_words, table, 8), DataError);
  EXPECT_EQ(build_full_examples(s.manifest, table, 8).size(),
            s.manifest.playlists.size());
}

TEST(CorruptEmbeddingFixtures, AllRejectedWithExpectedCode) {
  for (const auto& c : testing::corrupt_embedding_files()) {
    std::istringstream in(c.bytes);
    try {
      parse_embedding_text(in);
      ADD_FAILURE() << c.name << ": accepted";
    } catch (const FormatError& e) {
      EXPECT_EQ(e.code(), c.code) << c.name << ": " << e.what();
      if (c.line) EXPECT_EQ(e.line(), c.line) << c.name;
    }
  }
}

}  // namespace
}  // namespace musecap
