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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "musecap/checkpoint.hpp"
#include "musecap/data.hpp"
#include "musecap/embeddings.hpp"
#include "musecap/errors.hpp"
#include "pipeline.hpp"
#include "run_config.hpp"

namespace musecap::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool print_defaults = false;

  // train
  std::optional<std::size_t> epochs;
  std::optional<std::string> patience;
  std::optional<double> validation_fraction;
  std::optional<double> lambda;
  std::optional<std::string> mode;
  std::optional<std::string> embeddings, manifest, checkpoint_out, report_out;
  bool save_final = false;

  // caption / eval
  std::optional<std::string> checkpoint;
  std::optional<std::string> playlist;
  std::optional<std::size_t> max_len;
  std::optional<std::string> metrics_out;

  // synth
  std::string out_dir;
  SynthOptions synth;

  // inspect
  std::string inspect_path;
  std::string inspect_kind = "auto";
};

RunConfig effective_config(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{}
                                      : load_run_config(o.config_path);
  if (o.seed) c.training.seed = *o.seed;
  if (o.epochs) c.training.epochs = *o.epochs;
  if (o.patience) {
    if (*o.patience == "none") {
      c.training.patience.reset();
    } else {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(*o.patience, &used);
        if (used != o.patience->size() || o.patience->front() == '-') {
          throw std::invalid_argument("patience");
        }
        c.training.patience = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw ConfigError("--patience expects a non-negative integer or 'none'");
      }
    }
  }
  if (o.validation_fraction) {
    c.training.validation_fraction = *o.validation_fraction;
  }
  if (o.lambda) c.training.lambda = *o.lambda;
  if (o.mode) c.mode = parse_training_mode(*o.mode);
  if (o.embeddings) c.paths.embeddings = *o.embeddings;
  if (o.manifest) c.paths.manifest = *o.manifest;
  if (o.checkpoint_out) c.paths.checkpoint_out = *o.checkpoint_out;
  if (o.report_out) c.paths.report_out = *o.report_out;
  validate(c);
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("write failed: " + path.string());
}

ordered_json nan_to_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig c = effective_config(o);
  if (c.paths.manifest.empty()) throw ConfigError("no manifest path given");
  const EmbeddingTable table = load_table(c.paths.embeddings, c.dims.embedding);
  const Manifest manifest =
      load_manifest(c.paths.manifest, required_modality(c.mode));

  const auto start = std::chrono::steady_clock::now();
  const TrainOutcome result = train_model(c, table, manifest, o.save_final);
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();

  save_model(result.stored, c.paths.checkpoint_out);

  ordered_json epochs = ordered_json::array();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : result.report.history) {
    const double metric =
        std::isnan(r.validation_loss) ? r.train_loss : r.validation_loss;
    best = std::min(best, metric);
    epochs.push_back({{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"validation_loss", nan_to_null(r.validation_loss)},
                      {"best_validation_loss", best},
                      {"improved", r.improved}});
  }
  ordered_json report;
  report["mode"] = std::string(to_string(c.mode));
  report["seed"] = c.training.seed;
  report["train_playlists"] = result.train_ids;
  report["validation_playlists"] = result.validation_ids;
  report["epochs"] = std::move(epochs);
  report["best_epoch"] = result.report.best_epoch;
  report["best_validation_loss"] = result.report.best_loss;
  report["stopped_early"] = result.report.stopped_early;
  report["saved_parameters"] = o.save_final ? "final" : "best";
  report["wall_time_seconds"] = wall;
  report["checkpoint"] = c.paths.checkpoint_out;

  const std::string report_path = c.paths.report_out.empty()
                                      ? c.paths.checkpoint_out + ".report.json"
                                      : c.paths.report_out;
  write_text(report_path, report.dump(2) + "\n");

  out << "trained " << result.report.history.size() << " epochs, best epoch "
      << result.report.best_epoch << " (loss " << result.report.best_loss
      << ")\n"
      << "checkpoint " << c.paths.checkpoint_out << "\n"
      << "report " << report_path << "\n";
  return kExitOk;
}

struct Loaded {
  StoredModel stored;
  EmbeddingTable table;
  Manifest manifest;
};

Loaded load_for_inference(const Options& o) {
  const RunConfig c = effective_config(o);
  const std::string ckpt = o.checkpoint.value_or(c.paths.checkpoint_out);
  StoredModel stored = load_model(ckpt);
  EmbeddingTable table = load_table(c.paths.embeddings, std::nullopt);
  check_vocab(stored, table);
  if (c.paths.manifest.empty()) throw ConfigError("no manifest path given");
  Manifest manifest =
      load_manifest(c.paths.manifest, required_modality(stored.config.mode));
  if (o.playlist) manifest = select_playlist(manifest, *o.playlist);
  return {std::move(stored), std::move(table), std::move(manifest)};
}

int cmd_caption(const Options& o, std::ostream& out) {
  const Loaded l = load_for_inference(o);
  const std::size_t max_len = o.max_len.value_or(l.stored.config.max_caption_len);
  if (max_len < 1) throw ConfigError("--max-len must be >= 1");
  std::string text;
  for (const auto& cap : caption_playlists(l.stored, l.manifest, l.table,
                                           max_len)) {
    text += cap.playlist_id;
    text += '\t';
    for (std::size_t i = 0; i < cap.tokens.size(); ++i) {
      if (i) text += ' ';
      text += cap.tokens[i];
    }
    text += '\n';
  }
  out << text;
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const Loaded l = load_for_inference(o);
  const std::string json =
      to_json(evaluate(l.stored, l.manifest, l.table)).dump(2) + "\n";
  if (o.metrics_out) write_text(*o.metrics_out, json);
  out << json;
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.out_dir.empty()) throw ConfigError("synth needs --out");
  SynthOptions s = o.synth;
  if (o.seed) s.seed = *o.seed;
  const fs::path dir(o.out_dir);
  const SynthResult r = synthesize(s, dir);

  RunConfig c;
  c.dims.audio = s.audio_dim;
  c.dims.embedding = s.embedding_dim;
  c.dims.labels = s.labels;
  c.training.seed = s.seed;
  c.paths.embeddings = "embeddings.txt";
  c.paths.manifest = "manifest.json";
  c.paths.checkpoint_out = "model.mcap";
  write_text(dir / "config.json", to_json(c).dump(2) + "\n");

  out << "playlists " << r.manifest.playlists.size() << "\n"
      << "vocabulary " << r.embeddings.size() << "\n"
      << "config " << (dir / "config.json").string() << "\n";
  return kExitOk;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void inspect_checkpoint(const std::string& path, const std::string& bytes,
                        std::ostream& out) {
  Checkpoint ckpt;
  try {
    ckpt = read_checkpoint_bytes(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.code(), e.line(), path + ": " + e.detail());
  }
  const StoredModel stored = from_checkpoint(ckpt);  // shape validation
  std::size_t params = 0;
  for (const auto& t : ckpt.tensors) params += t.value.size();
  std::ostringstream s;
  s << "kind checkpoint\n"
    << "version " << static_cast<int>(kCheckpointVersion) << "\n"
    << "mode " << to_string(stored.config.mode) << "\n"
    << "vocab_hash " << stored.config.vocab_hash << "\n"
    << "config " << ckpt.config_json << "\n"
    << "tensors " << ckpt.tensors.size() << "\n"
    << "parameters " << params << "\n";
  for (const auto& t : ckpt.tensors) {
    s << "tensor " << t.name << " " << shape_string(t.value.shape()) << "\n";
  }
  out << s.str();
}

void inspect_embeddings(const std::string& path, std::ostream& out) {
  const EmbeddingTable table = load_embedding_file(path);
  const bool has_eos = table.contains(kEosToken);
  out << "kind embeddings\n"
      << "vocab_size " << table.size() << "\n"
      << "dim " << table.dim() << "\n"
      << "has_eos " << (has_eos ? "yes" : "no") << "\n"
      << "vocab_hash "
      << vocab_hash_hex(has_eos ? table : with_eos(table)) << "\n";
}

int cmd_inspect(const Options& o, std::ostream& out) {
  const std::string& path = o.inspect_path;
  std::string kind = o.inspect_kind;
  if (kind == "auto") {
    const std::string bytes = read_bytes(path);
    const bool magic = bytes.starts_with(kCheckpointMagic);
    if (magic || fs::path(path).extension() == ".mcap") {
      inspect_checkpoint(path, bytes, out);
    } else {
      inspect_embeddings(path, out);
    }
  } else if (kind == "checkpoint") {
    inspect_checkpoint(path, read_bytes(path), out);
  } else {
    inspect_embeddings(path, out);
  }
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kConfig:
      return kExitConfig;
    case ErrorKind::kData:
    case ErrorKind::kDimension:
      return kExitData;
    case ErrorKind::kNumerical:
      return kExitNumerical;
    case ErrorKind::kState:
      return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Options o;
  CLI::App app{"Playlist captioning with a GRU sequence-to-sequence model",
               "musecap"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.add_option("--config", o.config_path, "JSON run configuration");
  app.add_option("--seed", o.seed, "Seed override (unsigned 64-bit)");
  app.add_flag("--print-defaults", o.print_defaults,
               "Print the effective configuration as JSON and exit");

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--epochs", o.epochs);
  train->add_option("--patience", o.patience, "Integer or 'none'");
  train->add_option("--validation-fraction", o.validation_fraction);
  train->add_option("--lambda", o.lambda);
  train->add_option("--mode", o.mode, "pretrain-features or fully-train");
  train->add_option("--embeddings", o.embeddings);
  train->add_option("--manifest", o.manifest);
  train->add_option("--checkpoint-out", o.checkpoint_out);
  train->add_option("--report-out", o.report_out);
  train->add_flag("--save-final", o.save_final,
                  "Save the last epoch's parameters instead of the best");

  auto* caption = app.add_subcommand("caption", "Print greedy captions");
  auto* eval = app.add_subcommand("eval", "Print evaluation metrics as JSON");
  for (auto* sub : {caption, eval}) {
    sub->add_option("--checkpoint", o.checkpoint);
    sub->add_option("--embeddings", o.embeddings);
    sub->add_option("--manifest", o.manifest);
    sub->add_option("--playlist", o.playlist, "Restrict to one playlist id");
  }
  caption->add_option("--max-len", o.max_len);
  eval->add_option("--metrics-out", o.metrics_out);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", o.out_dir)->required();
  synth->add_option("--playlists", o.synth.playlists);
  synth->add_option("--tracks", o.synth.tracks_per_playlist);
  synth->add_option("--audio-dim", o.synth.audio_dim);
  synth->add_option("--embedding-dim", o.synth.embedding_dim);
  synth->add_option("--bands", o.synth.bands);
  synth->add_option("--frames", o.synth.frames);
  synth->add_option("--labels", o.synth.labels);

  auto* inspect = app.add_subcommand("inspect",
                                     "Summarize an embedding file or checkpoint");
  inspect->add_option("path", o.inspect_path)->required();
  inspect->add_option("--kind", o.inspect_kind)
      ->check(CLI::IsMember({"auto", "embeddings", "checkpoint"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (o.print_defaults) {
      out << to_json(effective_config(o)).dump(2) << "\n";
      return kExitOk;
    }
    if (train->parsed()) return cmd_train(o, out);
    if (caption->parsed()) return cmd_caption(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (synth->parsed()) return cmd_synth(o, out);
    if (inspect->parsed()) return cmd_inspect(o, out);
    err << app.help();
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace musecap::cli
