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

#include "pipeline.hpp"

#include <variant>

#include "musecap/errors.hpp"
#include "musecap/fully_train.hpp"
#include "musecap/seq2seq.hpp"

namespace musecap::cli {

namespace {

// Encoder input and teacher-forcing targets for one playlist, independent
// of the training mode.
struct Prepared {
  std::string id;
  Tensor tracks;
  Tensor targets;
  std::vector<std::string> target_tokens;
};

const Seq2SeqModel& seq2seq_of(const StoredModel& s) {
  if (const auto* m = std::get_if<Seq2SeqModel>(&s.model)) return *m;
  return std::get<FullModel>(s.model).seq2seq;
}

std::vector<Prepared> prepare(const StoredModel& stored,
                              const Manifest& manifest,
                              const EmbeddingTable& table) {
  std::vector<Prepared> out;
  const auto& cfg = stored.config;
  if (const auto* full = std::get_if<FullModel>(&stored.model)) {
    for (auto& ex : build_full_examples(manifest, table, cfg.max_caption_len)) {
      Tensor feats = full_track_features(*full, ex);
      out.push_back({ex.id, std::move(feats), std::move(ex.targets),
                     std::move(ex.target_tokens)});
    }
  } else {
    for (auto& ex : build_caption_examples(manifest, table, cfg.dims.audio,
                                           cfg.max_caption_len)) {
      out.push_back({ex.id, std::move(ex.tracks), std::move(ex.targets),
                     std::move(ex.target_tokens)});
    }
  }
  return out;
}

}  // namespace

Modality required_modality(TrainingMode mode) {
  return mode == TrainingMode::kFullyTrain ? Modality::kSpectrograms
                                           : Modality::kAudioFeatures;
}

EmbeddingTable load_table(const std::string& path,
                          std::optional<std::size_t> expected_dim) {
  if (path.empty()) throw ConfigError("no embeddings path given");
  EmbeddingTable base = load_embedding_file(path);
  if (expected_dim && *expected_dim != base.dim()) {
    throw ConfigError("dims.embedding is " + std::to_string(*expected_dim) +
                      " but " + path + " has dimension " +
                      std::to_string(base.dim()));
  }
  return with_eos(base);
}

TrainOutcome train_model(const RunConfig& c, const EmbeddingTable& table,
                         const Manifest& manifest, bool save_final) {
  const ManifestSplit parts =
      split(manifest, c.training.validation_fraction, c.training.seed);

  ModelConfig mc;
  mc.mode = c.mode;
  mc.dims.audio = c.dims.audio;
  mc.dims.embedding = table.dim();
  mc.dims.hidden = c.dims.hidden;
  mc.dims.sentence = c.dims.sentence.value_or(table.dim());
  mc.dims.labels = c.dims.labels;
  mc.seed = c.training.seed;
  mc.vocab_hash = vocab_hash_hex(table);
  mc.max_caption_len = c.training.max_caption_len;

  FitConfig fc;
  fc.epochs = c.training.epochs;
  fc.patience = c.training.patience;
  fc.seed = c.training.seed;
  fc.adam = c.optimizer;

  TrainOutcome out;
  for (const auto& p : parts.train.playlists) out.train_ids.push_back(p.id);
  for (const auto& p : parts.validation.playlists) {
    out.validation_ids.push_back(p.id);
  }

  if (c.mode == TrainingMode::kFullyTrain) {
    const auto train = build_full_examples(parts.train, table,
                                           mc.max_caption_len);
    const auto val = build_full_examples(parts.validation, table,
                                         mc.max_caption_len);
    FullModel model = FullModel::initialized(mc.dims, mc.seed);
    FullModel last = model;
    out.report = fit_fully(model, train, val, fc, c.training.lambda, &last);
    out.stored = StoredModel{mc, save_final ? std::move(last) : std::move(model)};
  } else {
    const auto train = build_caption_examples(parts.train, table, mc.dims.audio,
                                              mc.max_caption_len);
    const auto val = build_caption_examples(parts.validation, table,
                                            mc.dims.audio, mc.max_caption_len);
    Seq2SeqModel model = Seq2SeqModel::initialized(
        {mc.dims.audio + table.dim(), table.dim(), mc.dims.hidden}, mc.seed);
    Seq2SeqModel last = model;
    out.report = fit(model, train, val, fc, &last);
    out.stored = StoredModel{mc, save_final ? std::move(last) : std::move(model)};
  }
  return out;
}

void check_vocab(const StoredModel& stored, const EmbeddingTable& table) {
  const std::string hash = vocab_hash_hex(table);
  if (hash != stored.config.vocab_hash) {
    throw DataError("vocabulary hash mismatch: checkpoint has " +
                    stored.config.vocab_hash + ", embeddings give " + hash);
  }
  if (table.dim() != stored.config.dims.embedding) {
    throw DataError("embedding dimension mismatch: checkpoint expects " +
                    std::to_string(stored.config.dims.embedding) + ", got " +
                    std::to_string(table.dim()));
  }
}

Manifest select_playlist(const Manifest& manifest, const std::string& id) {
  const PlaylistEntry* p = manifest.find(id);
  if (!p) throw DataError("unknown playlist id '" + id + "'");
  Manifest out;
  out.base_dir = manifest.base_dir;
  out.playlists.push_back(*p);
  return out;
}

std::vector<Caption> caption_playlists(const StoredModel& stored,
                                       const Manifest& manifest,
                                       const EmbeddingTable& table,
                                       std::size_t max_len) {
  check_vocab(stored, table);
  const Seq2SeqModel& model = seq2seq_of(stored);
  std::vector<Caption> out;
  for (const auto& ex : prepare(stored, manifest, table)) {
    const Context ctx = encode(model, ex.tracks);
    out.push_back({ex.id, decode_greedy(model, ctx, table, max_len)});
  }
  return out;
}

EvalMetrics evaluate(const StoredModel& stored, const Manifest& manifest,
                     const EmbeddingTable& table) {
  check_vocab(stored, table);
  const Seq2SeqModel& model = seq2seq_of(stored);
  const auto examples = prepare(stored, manifest, table);

  EvalMetrics m;
  m.playlists = examples.size();
  std::size_t exact = 0, agree = 0, tokens = 0;
  for (const auto& ex : examples) {
    const Context ctx = encode(model, ex.tracks);
    const DecodeTrainResult r = decode_train(model, ctx, ex.targets);
    m.mean_cosine_loss += r.loss;
    for (std::size_t i = 0; i < ex.target_tokens.size(); ++i) {
      const NearestWord w = nearest_word(table, r.predictions.row(i));
      if (table.words()[w.index] == ex.target_tokens[i]) ++agree;
      ++tokens;
    }
    const auto greedy =
        decode_greedy(model, ctx, table, stored.config.max_caption_len);
    const std::vector<std::string> expected(ex.target_tokens.begin(),
                                            ex.target_tokens.end() - 1);
    if (greedy == expected) ++exact;
  }
  if (!examples.empty()) {
    const double n = static_cast<double>(examples.size());
    m.mean_cosine_loss /= n;
    m.exact_match_rate = static_cast<double>(exact) / n;
    m.token_agreement =
        static_cast<double>(agree) / static_cast<double>(tokens);
  }
  return m;
}

nlohmann::ordered_json to_json(const EvalMetrics& m) {
  return {{"playlists", m.playlists},
          {"mean_cosine_loss", m.mean_cosine_loss},
          {"exact_match_rate", m.exact_match_rate},
          {"token_agreement", m.token_agreement}};
}

EvalMetrics eval_metrics_from_json(const nlohmann::ordered_json& j) {
  try {
    EvalMetrics m;
    m.playlists = j.at("playlists").get<std::size_t>();
    m.mean_cosine_loss = j.at("mean_cosine_loss").get<double>();
    m.exact_match_rate = j.at("exact_match_rate").get<double>();
    m.token_agreement = j.at("token_agreement").get<double>();
    if (j.size() != 4) throw DataError("metrics: unexpected keys");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics: ") + e.what());
  }
}

}  // namespace musecap::cli
