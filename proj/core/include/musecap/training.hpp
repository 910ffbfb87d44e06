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

#ifndef MUSECAP_TRAINING_HPP_
#define MUSECAP_TRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musecap/adam.hpp"
#include "musecap/errors.hpp"
#include "musecap/params.hpp"
#include "musecap/random.hpp"
#include "musecap/seq2seq.hpp"

namespace musecap {

struct FitConfig {
  std::size_t epochs = 100;
  // Consecutive non-improving epochs tolerated; nullopt disables early
  // stopping. Training halts once the streak reaches max(patience, 1).
  std::optional<std::size_t> patience;
  std::uint64_t seed = 0;
  AdamConfig adam;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = std::numeric_limits<double>::quiet_NaN();
  bool improved = false;
};

struct FitReport {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  // Validation loss of the retained parameters (train loss when there is
  // no validation set).
  double best_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
};

// Per-example ADAM training with seeded shuffling, per-epoch evaluation and
// best-checkpoint retention. On return `model` holds the best parameters and
// `final_params`, when given, the parameters after the last epoch run.
//   loss_grad(const Model&, const Example&, Model& grads) -> double
//   evaluate(const Model&, std::span<const Example>) -> mean loss
template <typename Model, typename Example, typename LossGrad,
          typename Evaluate>
FitReport run_training(Model& model, std::span<const Example> train,
                       std::span<const Example> validation,
                       const FitConfig& config, LossGrad&& loss_grad,
                       Evaluate&& evaluate, Model* final_params = nullptr) {
  if (train.empty()) throw DataError("training set is empty");
  if (config.epochs == 0) throw ConfigError("epochs must be >= 1");

  AdamState adam(config.adam, model);
  Model grads = zeros_like(model);
  Model best = model;
  Rng order_rng(derive_seed(config.seed, "shuffle"));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitReport report;
  std::size_t streak = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t idx : order) {
      set_zero(grads);
      const double loss = loss_grad(model, train[idx], grads);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite training loss at epoch " +
                             std::to_string(epoch));
      }
      adam.step(model, grads);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = evaluate(model, train);
    if (!validation.empty()) rec.validation_loss = evaluate(model, validation);
    const double metric =
        validation.empty() ? rec.train_loss : rec.validation_loss;
    if (!std::isfinite(metric)) {
      throw NumericalError("non-finite evaluation loss at epoch " +
                           std::to_string(epoch));
    }
    if (metric < report.best_loss) {
      report.best_loss = metric;
      report.best_epoch = epoch;
      best = model;
      rec.improved = true;
      streak = 0;
    } else {
      ++streak;
    }
    report.history.push_back(rec);
    if (config.patience && streak >= std::max<std::size_t>(*config.patience, 1)) {
      report.stopped_early = epoch < config.epochs;
      break;
    }
  }
  if (final_params) *final_params = model;
  model = std::move(best);
  return report;
}

// One playlist prepared for the pre-computed-feature path.
struct CaptionExample {
  std::string id;
  Tensor tracks;   // N x (D_a + D_w)
  Tensor targets;  // M x D_w, last row is <eos>
  std::vector<std::string> target_tokens;
};

double mean_caption_loss(const Seq2SeqModel& model,
                         std::span<const CaptionExample> examples);

FitReport fit(Seq2SeqModel& model, std::span<const CaptionExample> train,
              std::span<const CaptionExample> validation,
              const FitConfig& config,
              Seq2SeqModel* final_params = nullptr);

}  // namespace musecap

#endif  // MUSECAP_TRAINING_HPP_
