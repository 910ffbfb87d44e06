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

#include "run_config.hpp"

#include <fstream>
#include <set>

#include "musecap/errors.hpp"

namespace musecap::cli {

using nlohmann::ordered_json;

namespace {

template <typename T>
ordered_json nullable(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void reject_unknown(const ordered_json& obj, const std::set<std::string>& keys,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (!keys.contains(k)) {
      throw ConfigError(where + ": unknown key \"" + k + "\"");
    }
  }
}

template <typename T>
void read(const ordered_json& obj, const char* key, T& out,
          const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
void read_optional(const ordered_json& obj, const char* key,
                   std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(obj, key, v, where);
  out = v;
}

// Unsigned fields reject negative JSON numbers instead of wrapping.
void read_size(const ordered_json& obj, const char* key, std::size_t& out,
               const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void read_optional_size(const ordered_json& obj, const char* key,
                        std::optional<std::size_t>& out,
                        const std::string& where) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  std::size_t v = 0;
  read_size(obj, key, v, where);
  out = v;
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

}  // namespace

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["mode"] = std::string(to_string(c.mode));
  j["dims"] = {{"audio", c.dims.audio},
               {"embedding", nullable(c.dims.embedding)},
               {"hidden", c.dims.hidden},
               {"sentence", nullable(c.dims.sentence)},
               {"labels", c.dims.labels}};
  j["optimizer"] = {{"lr", c.optimizer.lr},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon}};
  j["training"] = {{"epochs", c.training.epochs},
                   {"patience", nullable(c.training.patience)},
                   {"seed", c.training.seed},
                   {"validation_fraction", c.training.validation_fraction},
                   {"max_caption_len", c.training.max_caption_len},
                   {"lambda", c.training.lambda}};
  j["paths"] = {{"embeddings", c.paths.embeddings},
                {"manifest", c.paths.manifest},
                {"checkpoint_out", c.paths.checkpoint_out},
                {"report_out", c.paths.report_out}};
  return j;
}

RunConfig run_config_from_json(const ordered_json& j,
                               const std::filesystem::path& base_dir) {
  RunConfig c;
  reject_unknown(j, {"mode", "dims", "optimizer", "training", "paths"},
                 "config");
  if (j.contains("mode")) {
    std::string mode;
    read(j, "mode", mode, "config");
    c.mode = parse_training_mode(mode);
  }
  if (j.contains("dims")) {
    const auto& d = j.at("dims");
    reject_unknown(d, {"audio", "embedding", "hidden", "sentence", "labels"},
                   "config.dims");
    read_size(d, "audio", c.dims.audio, "config.dims");
    read_optional_size(d, "embedding", c.dims.embedding, "config.dims");
    read_size(d, "hidden", c.dims.hidden, "config.dims");
    read_optional_size(d, "sentence", c.dims.sentence, "config.dims");
    read_size(d, "labels", c.dims.labels, "config.dims");
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    reject_unknown(o, {"lr", "beta1", "beta2", "epsilon"}, "config.optimizer");
    read(o, "lr", c.optimizer.lr, "config.optimizer");
    read(o, "beta1", c.optimizer.beta1, "config.optimizer");
    read(o, "beta2", c.optimizer.beta2, "config.optimizer");
    read(o, "epsilon", c.optimizer.epsilon, "config.optimizer");
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    reject_unknown(t,
                   {"epochs", "patience", "seed", "validation_fraction",
                    "max_caption_len", "lambda"},
                   "config.training");
    read_size(t, "epochs", c.training.epochs, "config.training");
    read_optional_size(t, "patience", c.training.patience, "config.training");
    if (t.contains("seed")) {
      std::size_t seed = 0;
      read_size(t, "seed", seed, "config.training");
      c.training.seed = seed;
    }
    read(t, "validation_fraction", c.training.validation_fraction,
         "config.training");
    read_size(t, "max_caption_len", c.training.max_caption_len,
              "config.training");
    read(t, "lambda", c.training.lambda, "config.training");
  }
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    reject_unknown(p, {"embeddings", "manifest", "checkpoint_out", "report_out"},
                   "config.paths");
    read(p, "embeddings", c.paths.embeddings, "config.paths");
    read(p, "manifest", c.paths.manifest, "config.paths");
    read(p, "checkpoint_out", c.paths.checkpoint_out, "config.paths");
    read(p, "report_out", c.paths.report_out, "config.paths");
    c.paths.embeddings = resolve(base_dir, c.paths.embeddings);
    c.paths.manifest = resolve(base_dir, c.paths.manifest);
    c.paths.checkpoint_out = resolve(base_dir, c.paths.checkpoint_out);
    c.paths.report_out = resolve(base_dir, c.paths.report_out);
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config " + path.string() + ": invalid JSON: " +
                      e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

void validate(const RunConfig& c) {
  const auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(c.dims.audio, "dims.audio");
  positive(c.dims.hidden, "dims.hidden");
  if (c.dims.embedding) positive(*c.dims.embedding, "dims.embedding");
  if (c.dims.sentence) positive(*c.dims.sentence, "dims.sentence");
  positive(c.training.epochs, "training.epochs");
  positive(c.training.max_caption_len, "training.max_caption_len");
  if (!(c.training.validation_fraction > 0.0 &&
        c.training.validation_fraction < 1.0)) {
    throw ConfigError("training.validation_fraction must lie in (0, 1)");
  }
  if (!(c.training.lambda >= 0.0)) {
    throw ConfigError("training.lambda must be >= 0");
  }
  const auto& o = c.optimizer;
  if (!(o.lr > 0) || !(o.epsilon > 0) || !(o.beta1 > 0 && o.beta1 < 1) ||
      !(o.beta2 > 0 && o.beta2 < 1)) {
    throw ConfigError(
        "optimizer: lr, epsilon must be > 0 and beta1, beta2 in (0, 1)");
  }
}

}  // namespace musecap::cli
