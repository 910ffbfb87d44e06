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

#include "musecap/training.hpp"

namespace musecap {

double mean_caption_loss(const Seq2SeqModel& model,
                         std::span<const CaptionExample> examples) {
  if (examples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const auto& ex : examples) {
    total += caption_loss(model, ex.tracks, ex.targets);
  }
  return total / static_cast<double>(examples.size());
}

FitReport fit(Seq2SeqModel& model, std::span<const CaptionExample> train,
              std::span<const CaptionExample> validation,
              const FitConfig& config, Seq2SeqModel* final_params) {
  return run_training(
      model, train, validation, config,
      [](const Seq2SeqModel& m, const CaptionExample& ex, Seq2SeqModel& g) {
        return caption_loss(m, ex.tracks, ex.targets, &g);
      },
      [](const Seq2SeqModel& m, std::span<const CaptionExample> exs) {
        return mean_caption_loss(m, exs);
      },
      final_params);
}

}  // namespace musecap
