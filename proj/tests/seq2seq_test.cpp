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

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "musecap/embeddings.hpp"
#include "musecap/errors.hpp"
#include "musecap/gradcheck.hpp"
#include "musecap/gru.hpp"
#include "musecap/loss.hpp"
#include "musecap/params.hpp"
#include "musecap/seq2seq.hpp"
#include "musecap/training.hpp"
#include "test_support.hpp"

namespace musecap {
namespace {

using testing::max_abs_diff;
using testing::random_matrix;
using testing::random_vector;
using testing::randomize;

Seq2SeqModel random_model(const Seq2SeqDims& d, Rng& rng, double scale = 0.5) {
  Seq2SeqModel m = Seq2SeqModel::zeros(d);
  randomize(m, rng, scale);
  return m;
}

CaptionExample random_example(Rng& rng, const Seq2SeqDims& d, std::size_t n,
                              std::size_t m, const std::string& id) {
  return {id, random_matrix(rng, n, d.input), random_matrix(rng, m, d.embedding),
          {}};
}

TEST(Encode, ZeroModelGivesZeroContext) {
  const Seq2SeqModel m = Seq2SeqModel::zeros({5, 3, 4});
  Rng rng(1);
  const Context c = encode(m, random_matrix(rng, 1, 5));
  EXPECT_EQ(c.h1, std::vector<double>(4, 0.0));
  EXPECT_EQ(c.h2, std::vector<double>(4, 0.0));
}

TEST(Encode, MatchesUnrolledComposition) {
  Rng rng(17);
  const Seq2SeqDims d{4, 2, 3};
  const Seq2SeqModel m = random_model(d, rng);
  const Tensor tracks = random_matrix(rng, 2, 4);

  std::vector<double> h1(3, 0.0), h2(3, 0.0);
  for (std::size_t n = 0; n < 2; ++n) {
    h1 = gru_forward(m.enc1, tracks.row(n), h1);
    h2 = gru_forward(m.enc2, h1, h2);
  }
  const Context c = encode(m, tracks);
  EXPECT_EQ(c.h1, h1);
  EXPECT_EQ(c.h2, h2);
}

TEST(Encode, RejectsEmptyAndMismatchedInput) {
  const Seq2SeqModel m = Seq2SeqModel::zeros({5, 3, 4});
  EXPECT_THROW(encode(m, Tensor()), DataError);
  EXPECT_THROW(encode(m, Tensor(Shape{2, 4})), DimensionError);
}

TEST(EncodeBatch, PaddingIsMasked) {
  Rng rng(23);
  const Seq2SeqDims d{3, 2, 4};
  const Seq2SeqModel m = random_model(d, rng);
  const std::size_t B = 3, T = 4;
  const std::vector<std::size_t> lengths{2, 4, 1};
  Tensor padded(Shape{B, T, 3});
  for (auto& v : padded.values()) v = rng.uniform(-1, 1);
  Tensor other = padded;
  // Scramble every padded position.
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = lengths[b]; t < T; ++t) {
      for (std::size_t k = 0; k < 3; ++k) other[(b * T + t) * 3 + k] = 99.0 + k;
    }
  }
  const auto a = encode_batch(m, padded, lengths);
  const auto c = encode_batch(m, other, lengths);
  for (std::size_t b = 0; b < B; ++b) {
    EXPECT_EQ(a[b].h1, c[b].h1);
    EXPECT_EQ(a[b].h2, c[b].h2);
    std::vector<double> rows(padded.values().begin() + b * T * 3,
                             padded.values().begin() + (b * T + lengths[b]) * 3);
    const Context single =
        encode(m, Tensor::matrix(lengths[b], 3, std::move(rows)));
    EXPECT_LT(max_abs_diff(single.h2, a[b].h2), 1e-15);
  }
}

TEST(DecodeTrain, SingleStepEqualsCosineLoss) {
  Rng rng(2);
  const Seq2SeqDims d{3, 4, 3};
  const Seq2SeqModel m = random_model(d, rng);
  const Context ctx = encode(m, random_matrix(rng, 2, 3));
  const Tensor target = random_matrix(rng, 1, 4);
  const DecodeTrainResult r = decode_train(m, ctx, target);
  EXPECT_EQ(r.loss, cosine_proximity_loss(r.predictions.row(0), target.row(0)).loss);
}

TEST(DecodeTrain, CollinearPredictionsGiveZeroLoss) {
  Rng rng(3);
  const Seq2SeqDims d{3, 4, 3};
  Seq2SeqModel m = random_model(d, rng);
  m.proj.weight.fill(0.0);
  const auto t = random_vector(rng, 4);
  m.proj.bias = Tensor::vector(t);
  std::vector<double> rows;
  for (double s : {1.0, 2.5, 0.1}) {
    for (double v : t) rows.push_back(s * v);
  }
  const Context ctx = encode(m, random_matrix(rng, 2, 3));
  EXPECT_LT(decode_train(m, ctx, Tensor::matrix(3, 4, rows)).loss, 1e-8);
}

// Solves the projection so every teacher-forced step reproduces its target.
TEST(DecodeTrain, ForcedProjectionReproducesDistinctTargets) {
  Rng rng(4);
  const Seq2SeqDims d{3, 4, 3};
  Seq2SeqModel m = random_model(d, rng);
  const Tensor tracks = random_matrix(rng, 2, 3);
  const Tensor targets = random_matrix(rng, 2, 4);
  const Context ctx = encode(m, tracks);

  // Decoder top-layer states under teacher forcing, augmented with a 1.
  std::vector<std::vector<double>> a;
  std::vector<double> h1 = ctx.h1, h2 = ctx.h2, x(4, 0.0);
  for (std::size_t s = 0; s < 2; ++s) {
    h1 = gru_forward(m.dec1, x, h1);
    h2 = gru_forward(m.dec2, h1, h2);
    auto col = h2;
    col.push_back(1.0);
    a.push_back(col);
    x.assign(targets.row(s).begin(), targets.row(s).end());
  }
  // W_aug = T (A^T A)^-1 A^T with A = [a0 a1].
  const double g00 = linalg::dot(a[0], a[0]), g01 = linalg::dot(a[0], a[1]),
               g11 = linalg::dot(a[1], a[1]);
  const double det = g00 * g11 - g01 * g01;
  const double i00 = g11 / det, i01 = -g01 / det, i11 = g00 / det;
  for (std::size_t r = 0; r < 4; ++r) {
    const double c0 = targets(0, r) * i00 + targets(1, r) * i01;
    const double c1 = targets(0, r) * i01 + targets(1, r) * i11;
    for (std::size_t k = 0; k < 4; ++k) {
      const double w = c0 * a[0][k] + c1 * a[1][k];
      if (k < 3) {
        m.proj.weight(r, k) = w;
      } else {
        m.proj.bias[r] = w;
      }
    }
  }
  EXPECT_LT(decode_train(m, ctx, targets).loss, 1e-8);
}

TEST(DecodeTrain, RejectsZeroTargetRow) {
  const Seq2SeqModel m = Seq2SeqModel::zeros({2, 2, 2});
  const Context ctx{std::vector<double>(2, 0.0), std::vector<double>(2, 0.0)};
  EXPECT_THROW(decode_train(m, ctx, Tensor::matrix(2, 2, {1, 0, 0, 0})),
               DataError);
}

TEST(CaptionLoss, GradientCheckAcrossSeeds) {
  for (std::uint64_t seed = 100; seed < 124; ++seed) {
    Rng rng(seed);
    // D_w = 1 makes cosine locally constant, leaving only epsilon-scale
    // gradients that a relative-error test cannot resolve.
    const std::size_t H = 1 + rng.below(4), Dw = 2 + rng.below(4);
    const std::size_t Da = 1 + rng.below(3);
    const std::size_t N = 1 + rng.below(3), M = 1 + rng.below(3);
    const Seq2SeqDims d{Da + Dw, Dw, H};
    Seq2SeqModel m = random_model(d, rng, 0.8);
    Tensor tracks = random_matrix(rng, N, d.input);
    const Tensor targets = random_matrix(rng, M, Dw);

    Seq2SeqModel grads = Seq2SeqModel::zeros(d);
    Tensor d_tracks;
    caption_loss(m, tracks, targets, &grads, &d_tracks);

    const auto theta = flatten_params(m);
    const auto f = [&](std::span<const double> x) {
      Seq2SeqModel probe = m;
      unflatten_params(x, probe);
      return caption_loss(probe, tracks, targets);
    };
    const auto report =
        gradient_check(f, theta, flatten_params(grads), 1e-5);
    EXPECT_TRUE(report.passed) << "seed " << seed << " err "
                               << report.max_relative_error;

    const auto g_in = [&](std::span<const double> x) {
      Tensor t = Tensor::matrix(N, d.input, {x.begin(), x.end()});
      return caption_loss(m, t, targets);
    };
    const auto in_report =
        gradient_check(g_in, tracks.values(), d_tracks.values(), 1e-5);
    EXPECT_TRUE(in_report.passed) << "seed " << seed << " input err "
                                  << in_report.max_relative_error;
  }
}

TEST(DecodeGreedy, ZeroModelRepeatsNearestWordOfBias) {
  const EmbeddingTable table = with_eos(EmbeddingTable(
      {"up", "down"}, Tensor::matrix(2, 2, {0, 1, 0, -1})));
  Seq2SeqModel m = Seq2SeqModel::zeros({3, 2, 2});
  m.proj.bias = Tensor::vector({0.1, -2.0});
  const Context ctx{std::vector<double>(2, 0.0), std::vector<double>(2, 0.0)};
  const auto out = decode_greedy(m, ctx, table, 5);
  EXPECT_EQ(out, std::vector<std::string>(5, "down"));

  m.proj.bias = Tensor::vector(eos_vector(2));
  EXPECT_TRUE(decode_greedy(m, ctx, table, 5).empty());
}

TEST(DecodeGreedy, LengthBoundAndVocabularyProperty) {
  Rng rng(31);
  std::vector<std::string> words;
  for (int i = 0; i < 12; ++i) words.push_back("w" + std::to_string(i));
  const EmbeddingTable table =
      with_eos(EmbeddingTable(words, random_matrix(rng, 12, 4)));
  for (int trial = 0; trial < 30; ++trial) {
    const Seq2SeqModel m = random_model({5, 4, 3}, rng, 1.0);
    const Context ctx = encode(m, random_matrix(rng, 2, 5));
    const std::size_t max_len = 1 + rng.below(8);
    const auto out = decode_greedy(m, ctx, table, max_len);
    EXPECT_LE(out.size(), max_len);
    for (const auto& w : out) {
      EXPECT_TRUE(table.contains(w));
      EXPECT_NE(w, kEosToken);
    }
  }
}

struct FitFixture {
  Seq2SeqDims dims{4, 3, 4};
  std::vector<CaptionExample> train, val;

  explicit FitFixture(std::uint64_t seed) {
    Rng rng(seed);
    for (int i = 0; i < 4; ++i) {
      train.push_back(random_example(rng, dims, 2, 2, "t" + std::to_string(i)));
    }
    for (int i = 0; i < 2; ++i) {
      val.push_back(random_example(rng, dims, 2, 2, "v" + std::to_string(i)));
    }
  }
};

TEST(Fit, SameSeedGivesIdenticalCurvesAndParameters) {
  FitFixture fx(40);
  FitConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 7;
  Seq2SeqModel a = Seq2SeqModel::initialized(fx.dims, 1);
  Seq2SeqModel b = Seq2SeqModel::initialized(fx.dims, 1);
  const FitReport ra = fit(a, fx.train, fx.val, cfg);
  const FitReport rb = fit(b, fx.train, fx.val, cfg);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
    EXPECT_EQ(ra.history[i].validation_loss, rb.history[i].validation_loss);
  }
  EXPECT_EQ(flatten_params(a), flatten_params(b));
}

TEST(Fit, RetainedCheckpointIsNoWorseThanFinal) {
  FitFixture fx(41);
  FitConfig cfg;
  cfg.epochs = 60;
  cfg.adam.lr = 1e-2;
  Seq2SeqModel m = Seq2SeqModel::initialized(fx.dims, 2);
  Seq2SeqModel last = m;
  const FitReport r = fit(m, fx.train, fx.val, cfg, &last);
  const double retained = mean_caption_loss(m, fx.val);
  EXPECT_EQ(retained, r.best_loss);
  EXPECT_LE(retained, mean_caption_loss(last, fx.val));
  EXPECT_EQ(mean_caption_loss(last, fx.val), r.history.back().validation_loss);
}

TEST(Fit, ZeroPatienceStopsAtFirstNonImprovement) {
  FitFixture fx(42);
  FitConfig cfg;
  cfg.epochs = 200;
  cfg.patience = 0;
  cfg.adam.lr = 2e-2;
  Seq2SeqModel m = Seq2SeqModel::initialized(fx.dims, 3);
  const FitReport r = fit(m, fx.train, fx.val, cfg);
  ASSERT_TRUE(r.stopped_early);
  ASSERT_GE(r.history.size(), 2u);
  for (std::size_t i = 0; i + 1 < r.history.size(); ++i) {
    EXPECT_TRUE(r.history[i].improved);
  }
  EXPECT_FALSE(r.history.back().improved);
  EXPECT_EQ(r.best_epoch, r.history.size() - 1);
}

TEST(Fit, PatienceCountsConsecutiveNonImprovingEpochs) {
  FitFixture fx(43);
  FitConfig cfg;
  cfg.epochs = 300;
  cfg.patience = 3;
  cfg.adam.lr = 2e-2;
  Seq2SeqModel m = Seq2SeqModel::initialized(fx.dims, 4);
  const FitReport r = fit(m, fx.train, fx.val, cfg);
  ASSERT_TRUE(r.stopped_early);
  const std::size_t n = r.history.size();
  ASSERT_GE(n, 4u);
  EXPECT_EQ(n - r.best_epoch, 3u);
  for (std::size_t i = n - 3; i < n; ++i) EXPECT_FALSE(r.history[i].improved);
}

TEST(Fit, MemorizesFourExamples) {
  FitFixture fx(44);
  FitConfig cfg;
  cfg.epochs = 500;
  Seq2SeqModel m = Seq2SeqModel::initialized({4, 3, 16}, 5);
  Seq2SeqModel last = m;
  fit(m, fx.train, {}, cfg, &last);
  EXPECT_LT(mean_caption_loss(last, fx.train), 0.05);
}

TEST(Fit, RejectsEmptyTrainingSet) {
  Seq2SeqModel m = Seq2SeqModel::zeros({2, 2, 2});
  EXPECT_THROW(fit(m, {}, {}, FitConfig{}), DataError);
}

}  // namespace
}  // namespace musecap
