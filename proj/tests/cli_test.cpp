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

#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "commands.hpp"
#include "pipeline.hpp"
#include "test_support.hpp"

namespace musecap::cli {
namespace {

using musecap::testing::TempDir;
using musecap::testing::read_file_bytes;
using musecap::testing::write_file;

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Small synthetic corpus with a config tuned to train in well under a second.
class CliCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    const CliResult r = cli({"synth", "--out", dir_.path().string(), "--playlists",
                       "5", "--audio-dim", "6", "--embedding-dim", "8"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    auto j = nlohmann::ordered_json::parse(read_file_bytes(config()));
    j["dims"]["hidden"] = 8;
    j["training"]["epochs"] = 5;
    write_file(config(), j.dump(2) + "\n");
  }

  std::string config() const { return (dir_ / "config.json").string(); }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

  TempDir dir_{"cli"};
};

TEST(Cli, PrintDefaultsIsValidConfig) {
  const CliResult r = cli({"--print-defaults"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::ordered_json::parse(r.out);
  EXPECT_EQ(j["dims"]["audio"], 50);
  EXPECT_EQ(j["dims"]["hidden"], 256);
  EXPECT_EQ(j["optimizer"]["lr"], 1e-3);
  EXPECT_EQ(j["training"]["patience"], 10);
}

TEST(Cli, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(cli({"train", "--epochs", "many"}).code, kExitConfig);
  EXPECT_EQ(cli({"--config", "/nonexistent/config.json", "train"}).code,
            kExitConfig);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, MetricsJsonRoundTrip) {
  const EvalMetrics m{3, 0.25, 1.0 / 3.0, 0.8};
  const EvalMetrics back = eval_metrics_from_json(to_json(m));
  EXPECT_EQ(back.playlists, 3u);
  EXPECT_EQ(back.mean_cosine_loss, 0.25);
  EXPECT_EQ(back.exact_match_rate, 1.0 / 3.0);
  EXPECT_EQ(back.token_agreement, 0.8);
  auto j = to_json(m);
  j["extra"] = 1;
  EXPECT_ANY_THROW(eval_metrics_from_json(j));
}

TEST_F(CliCorpus, MissingEmbeddingFileIsDataErrorNamingPath) {
  const CliResult r = cli({"--config", config(), "train", "--embeddings",
                     path("absent.txt")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("absent.txt"), std::string::npos) << r.err;
}

TEST_F(CliCorpus, BadValidationFractionIsConfigError) {
  const CliResult r = cli(
      {"--config", config(), "train", "--validation-fraction", "1.5"});
  EXPECT_EQ(r.code, kExitConfig) << r.err;
}

TEST_F(CliCorpus, TrainingIsBitReproducible) {
  ASSERT_EQ(cli({"--config", config(), "--seed", "3", "train",
                 "--checkpoint-out", path("a.mcap")}).code, kExitOk);
  ASSERT_EQ(cli({"--config", config(), "--seed", "3", "train",
                 "--checkpoint-out", path("b.mcap")}).code, kExitOk);
  ASSERT_EQ(cli({"--config", config(), "--seed", "4", "train",
                 "--checkpoint-out", path("c.mcap")}).code, kExitOk);
  EXPECT_EQ(read_file_bytes(path("a.mcap")), read_file_bytes(path("b.mcap")));
  EXPECT_NE(read_file_bytes(path("a.mcap")), read_file_bytes(path("c.mcap")));
}

TEST_F(CliCorpus, ReportBestLossIsMonotone) {
  ASSERT_EQ(cli({"--config", config(), "train", "--epochs", "12",
                 "--patience", "none"}).code, kExitOk);
  const auto report =
      nlohmann::json::parse(read_file_bytes(path("model.mcap.report.json")));
  ASSERT_EQ(report["epochs"].size(), 12u);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& e : report["epochs"]) {
    const double best = e["best_validation_loss"];
    EXPECT_LE(best, prev);
    EXPECT_EQ(e["improved"].get<bool>(), best < prev);
    prev = best;
  }
  EXPECT_EQ(report["best_validation_loss"].get<double>(), prev);
  EXPECT_FALSE(report["stopped_early"].get<bool>());
}

TEST_F(CliCorpus, CaptionIsDeterministicAndCoversEveryPlaylist) {
  ASSERT_EQ(cli({"--config", config(), "train"}).code, kExitOk);
  const std::vector<std::string> args = {"--config", config(), "caption",
                                         "--checkpoint", path("model.mcap")};
  const CliResult a = cli(args), b = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream lines(a.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_NE(line.find('\t'), std::string::npos) << line;
    ++n;
  }
  EXPECT_EQ(n, 5u);

  const CliResult one = cli({"--config", config(), "caption", "--checkpoint",
                       path("model.mcap"), "--playlist", "p002"});
  ASSERT_EQ(one.code, kExitOk) << one.err;
  EXPECT_EQ(one.out.rfind("p002\t", 0), 0u) << one.out;
}

TEST_F(CliCorpus, UnknownPlaylistNamesTheId) {
  ASSERT_EQ(cli({"--config", config(), "train"}).code, kExitOk);
  const CliResult r = cli({"--config", config(), "caption", "--checkpoint",
                     path("model.mcap"), "--playlist", "no-such-list"});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_NE(r.err.find("no-such-list"), std::string::npos) << r.err;
}

TEST_F(CliCorpus, VocabularyMismatchIsRejected) {
  ASSERT_EQ(cli({"--config", config(), "train"}).code, kExitOk);
  std::string text = read_file_bytes(path("embeddings.txt"));
  text.replace(text.find('\n') + 1, 1, "Q");  // rename the first word
  write_file(path("other.txt"), text);
  const CliResult r = cli({"--config", config(), "caption", "--checkpoint",
                     path("model.mcap"), "--embeddings", path("other.txt")});
  EXPECT_EQ(r.code, kExitData) << r.err;
}

TEST_F(CliCorpus, InspectListsEachTensorOnce) {
  ASSERT_EQ(cli({"--config", config(), "train"}).code, kExitOk);
  const CliResult r = cli({"inspect", path("model.mcap")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::set<std::string> names;
  std::size_t declared = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("tensors ", 0) == 0) declared = std::stoul(line.substr(8));
    if (line.rfind("tensor ", 0) == 0) {
      const std::string name = line.substr(7, line.find(' ', 7) - 7);
      EXPECT_TRUE(names.insert(name).second) << name;
    }
  }
  EXPECT_EQ(names.size(), declared);
  EXPECT_GT(declared, 0u);

  const CliResult emb = cli({"inspect", path("embeddings.txt")});
  ASSERT_EQ(emb.code, kExitOk) << emb.err;
  EXPECT_NE(emb.out.find("kind embeddings"), std::string::npos);
  EXPECT_NE(emb.out.find("dim 8"), std::string::npos);
}

TEST_F(CliCorpus, TruncatedCheckpointIsDataError) {
  ASSERT_EQ(cli({"--config", config(), "train"}).code, kExitOk);
  const std::string bytes = read_file_bytes(path("model.mcap"));
  write_file(path("cut.mcap"), bytes.substr(0, bytes.size() - 9));
  EXPECT_EQ(cli({"inspect", path("cut.mcap")}).code, kExitData);
  EXPECT_EQ(cli({"--config", config(), "caption", "--checkpoint",
                 path("cut.mcap")}).code,
            kExitData);
}

TEST_F(CliCorpus, UntrainedModelHasNoExactMatches) {
  ASSERT_EQ(cli({"--config", config(), "train", "--epochs", "1"}).code,
            kExitOk);
  const CliResult r = cli({"--config", config(), "eval", "--checkpoint",
                     path("model.mcap"), "--metrics-out", path("m.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const EvalMetrics m = eval_metrics_from_json(
      nlohmann::ordered_json::parse(read_file_bytes(path("m.json"))));
  EXPECT_EQ(m.playlists, 5u);
  EXPECT_EQ(m.exact_match_rate, 0.0);
  EXPECT_GE(m.token_agreement, 0.0);
  EXPECT_LE(m.token_agreement, 1.0);
  EXPECT_GE(m.mean_cosine_loss, 0.0);
  EXPECT_LE(m.mean_cosine_loss, 2.0);
}

TEST_F(CliCorpus, FullyTrainPipelineRuns) {
  ASSERT_EQ(cli({"--config", config(), "train", "--mode", "fully-train",
                 "--checkpoint-out", path("full.mcap")}).code,
            kExitOk);
  const CliResult ins = cli({"inspect", path("full.mcap")});
  EXPECT_NE(ins.out.find("mode fully-train"), std::string::npos) << ins.out;
  const CliResult cap = cli({"--config", config(), "caption", "--checkpoint",
                       path("full.mcap")});
  EXPECT_EQ(cap.code, kExitOk) << cap.err;
}

}  // namespace
}  // namespace musecap::cli
