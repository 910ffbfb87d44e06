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

#include <cstring>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "corrupt_fixtures.hpp"
#include "musecap/checkpoint.hpp"
#include "musecap/embeddings.hpp"
#include "musecap/errors.hpp"
#include "musecap/params.hpp"
#include "test_support.hpp"

namespace musecap {
namespace {

using testing::checkpoint_bytes;
using testing::tiny_stored_model;

std::uint32_t read_u32(const std::string& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  }
  return v;
}

TEST(Checkpoint, ByteLayout) {
  Checkpoint c;
  c.tensors.push_back({"ab", Tensor::matrix(1, 2, {1.0, -2.0})});
  c.config_json = "{}";
  const std::string b = checkpoint_bytes(c);
  ASSERT_EQ(b.size(), 4 + 1 + 4 + 2 + 2 + 1 + 16 + 16 + 4 + 2u);
  EXPECT_EQ(b.substr(0, 4), "MCAP");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(read_u32(b, 5), 1u);
  EXPECT_EQ(static_cast<unsigned char>(b[9]), 2u);  // u16 name length, LE
  EXPECT_EQ(b[10], 0);
  EXPECT_EQ(b.substr(11, 2), "ab");
  EXPECT_EQ(b[13], 2);  // rank
  EXPECT_EQ(b[14], 1);  // dims[0] = 1, LE u64
  EXPECT_EQ(b[22], 2);  // dims[1] = 2
  double v = 0;
  std::memcpy(&v, b.data() + 30, 8);
  EXPECT_EQ(v, 1.0);
  EXPECT_EQ(read_u32(b, 46), 2u);
  EXPECT_EQ(b.substr(50), "{}");
}

TEST(Checkpoint, PretrainModelRoundTrip) {
  const StoredModel m = tiny_stored_model();
  const Checkpoint c = to_checkpoint(m);
  const std::string bytes = checkpoint_bytes(c);
  const StoredModel back = from_checkpoint(read_checkpoint_bytes(bytes));
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(flatten_params(std::get<Seq2SeqModel>(back.model)),
            flatten_params(std::get<Seq2SeqModel>(m.model)));
  EXPECT_EQ(checkpoint_bytes(to_checkpoint(back)), bytes);
}

TEST(Checkpoint, FullModelRoundTripListsEveryTensorOnce) {
  ModelConfig cfg;
  cfg.mode = TrainingMode::kFullyTrain;
  cfg.dims = FullDims{3, 4, 2, 3, 2};
  cfg.vocab_hash = "00000000000000ff";
  const StoredModel m{cfg, FullModel::initialized(cfg.dims, 9)};
  testing::TempDir dir("ckpt");
  save_model(m, dir / "m.mcap");
  const StoredModel back = load_model(dir / "m.mcap");
  EXPECT_EQ(back.config, cfg);
  const auto& full = std::get<FullModel>(back.model);
  EXPECT_TRUE(full.label_head.has_value());
  EXPECT_EQ(flatten_params(full), flatten_params(std::get<FullModel>(m.model)));

  const Checkpoint c = to_checkpoint(back);
  std::set<std::string> names;
  for (const auto& t : c.tensors) EXPECT_TRUE(names.insert(t.name).second);
  EXPECT_EQ(names.size(), param_refs(full).size());
  EXPECT_TRUE(names.contains("label_head.weight"));
  EXPECT_TRUE(names.contains("audio.conv1.weight"));
}

TEST(Checkpoint, ConfigJsonRoundTripAndValidation) {
  const ModelConfig cfg = tiny_stored_model().config;
  EXPECT_EQ(model_config_from_json(model_config_to_json(cfg)), cfg);
  EXPECT_THROW(model_config_from_json("[]"), FormatError);
  EXPECT_THROW(parse_training_mode("half-train"), ConfigError);
  EXPECT_EQ(parse_training_mode("fully-train"), TrainingMode::kFullyTrain);
}

TEST(Checkpoint, RejectsEveryCorruptFixture) {
  for (const auto& c : testing::corrupt_checkpoints()) {
    try {
      from_checkpoint(read_checkpoint_bytes(c.bytes));
      ADD_FAILURE() << c.name << ": accepted";
    } catch (const FormatError& e) {
      EXPECT_EQ(e.code(), c.code) << c.name << ": " << e.what();
    }
  }
}

TEST(Checkpoint, TruncationAtEveryOffsetIsRejected) {
  const std::string bytes = checkpoint_bytes(to_checkpoint(tiny_stored_model()));
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(read_checkpoint_bytes(std::string_view(bytes).substr(0, n)),
                 FormatError)
        << n;
  }
}

TEST(Checkpoint, MissingFileIsDataError) {
  EXPECT_THROW(load_model("/nonexistent/model.mcap"), DataError);
}

}  // namespace
}  // namespace musecap
