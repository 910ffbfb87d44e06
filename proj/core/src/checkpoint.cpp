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

#include "musecap/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "musecap/errors.hpp"
#include "musecap/params.hpp"

namespace musecap {

namespace {

using nlohmann::json;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) &
                                    0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw FormatError(FormatCode::kTruncated, 0,
                        std::string("checkpoint ends inside ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  std::string buf(kCheckpointMagic);
  put_le<std::uint8_t>(buf, kCheckpointVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (t.name.size() > 0xffff) throw DataError("tensor name too long");
    put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(t.name.size()));
    buf += t.name;
    put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(t.value.rank()));
    for (std::size_t d : t.value.shape()) put_le<std::uint64_t>(buf, d);
    for (double v : t.value.values()) {
      put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
    }
  }
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ckpt.config_json.size()));
  buf += ckpt.config_json;
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Checkpoint read_checkpoint_bytes(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kCheckpointMagic.size() ||
      bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError(FormatCode::kBadMagic, 0, "not an MCAP checkpoint");
  }
  r.take(kCheckpointMagic.size(), "magic");
  const auto version = r.get<std::uint8_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError(FormatCode::kBadVersion, 0,
                      "unsupported version " + std::to_string(version));
  }

  Checkpoint ckpt;
  const auto count = r.get<std::uint32_t>("tensor count");
  std::set<std::string, std::less<>> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>("tensor name length");
    std::string name(r.take(name_len, "tensor name"));
    if (!names.insert(name).second) {
      throw FormatError(FormatCode::kDuplicateTensor, 0, name);
    }
    const auto rank = r.get<std::uint8_t>("tensor rank");
    if (rank == 0) {
      throw FormatError(FormatCode::kDimMismatch, 0, name + ": rank 0");
    }
    Shape shape;
    std::size_t count_values = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      const auto d = r.get<std::uint64_t>("tensor dims");
      if (d == 0) {
        throw FormatError(FormatCode::kDimMismatch, 0, name + ": zero dim");
      }
      // bound by the bytes actually present so corrupt dims cannot
      // trigger huge allocations
      const std::uint64_t limit = r.remaining() / 8;
      if (d > limit || count_values > limit / d) {
        throw FormatError(FormatCode::kTruncated, 0,
                          name + ": declared size exceeds file");
      }
      count_values *= d;
      shape.push_back(static_cast<std::size_t>(d));
    }
    if (count_values > r.remaining() / 8) {
      throw FormatError(FormatCode::kTruncated, 0,
                        name + ": declared size exceeds file");
    }
    std::vector<double> values(count_values);
    for (double& v : values) {
      v = std::bit_cast<double>(r.get<std::uint64_t>("tensor values"));
    }
    ckpt.tensors.push_back({std::move(name),
                            Tensor(std::move(shape), std::move(values))});
  }
  const auto config_len = r.get<std::uint32_t>("config length");
  ckpt.config_json = std::string(r.take(config_len, "config JSON"));
  if (r.remaining() != 0) {
    throw FormatError(FormatCode::kTrailingBytes, 0,
                      std::to_string(r.remaining()) + " bytes after config");
  }
  return ckpt;
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return read_checkpoint_bytes(bytes);
}

std::string_view to_string(TrainingMode mode) {
  return mode == TrainingMode::kFullyTrain ? "fully-train"
                                           : "pretrain-features";
}

TrainingMode parse_training_mode(std::string_view s) {
  if (s == "pretrain-features") return TrainingMode::kPretrainFeatures;
  if (s == "fully-train") return TrainingMode::kFullyTrain;
  throw ConfigError("unknown mode '" + std::string(s) +
                    "' (expected pretrain-features or fully-train)");
}

std::string model_config_to_json(const ModelConfig& c) {
  json j;
  j["mode"] = std::string(to_string(c.mode));
  j["dims"] = {{"audio", c.dims.audio},       {"embedding", c.dims.embedding},
               {"hidden", c.dims.hidden},     {"sentence", c.dims.sentence},
               {"labels", c.dims.labels}};
  j["seed"] = c.seed;
  j["vocab_hash"] = c.vocab_hash;
  j["max_caption_len"] = c.max_caption_len;
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ModelConfig c;
    c.mode = parse_training_mode(j.at("mode").get<std::string>());
    const auto& d = j.at("dims");
    c.dims.audio = d.at("audio").get<std::size_t>();
    c.dims.embedding = d.at("embedding").get<std::size_t>();
    c.dims.hidden = d.at("hidden").get<std::size_t>();
    c.dims.sentence = d.at("sentence").get<std::size_t>();
    c.dims.labels = d.at("labels").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.vocab_hash = j.at("vocab_hash").get<std::string>();
    c.max_caption_len = j.at("max_caption_len").get<std::size_t>();
    if (c.dims.audio == 0 || c.dims.embedding == 0 || c.dims.hidden == 0 ||
        c.dims.sentence == 0 || c.max_caption_len == 0) {
      throw FormatError(FormatCode::kBadConfig, 0, "zero dimension in config");
    }
    return c;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(FormatCode::kBadConfig, 0, e.what());
  }
}

namespace {

FullModel zero_full_model(const FullDims& d) {
  FullModel m;
  m.audio = AudioSummarizerParams::zeros(d.audio);
  m.text = GruParams::zeros(d.embedding, d.sentence);
  if (d.labels > 0) {
    m.label_head = DenseParams::zeros(d.audio + d.sentence, d.labels);
  }
  m.seq2seq = Seq2SeqModel::zeros({d.audio + d.sentence, d.embedding, d.hidden});
  return m;
}

template <typename Model>
void fill_from(const Checkpoint& ckpt, Model& model) {
  std::map<std::string, Tensor*, std::less<>> expected;
  for (auto& ref : param_refs(model)) expected.emplace(ref.name, ref.tensor);
  std::set<std::string, std::less<>> seen;
  for (const auto& t : ckpt.tensors) {
    const auto it = expected.find(t.name);
    if (it == expected.end()) {
      throw FormatError(FormatCode::kUnknownTensor, 0, t.name);
    }
    if (!seen.insert(t.name).second) {
      throw FormatError(FormatCode::kDuplicateTensor, 0, t.name);
    }
    if (it->second->shape() != t.value.shape()) {
      throw FormatError(FormatCode::kDimMismatch, 0,
                        t.name + ": config implies " +
                            shape_string(it->second->shape()) + ", file has " +
                            shape_string(t.value.shape()));
    }
    if (!t.value.all_finite()) {
      throw FormatError(FormatCode::kNonFinite, 0, t.name);
    }
    *it->second = t.value;
  }
  for (const auto& [name, ptr] : expected) {
    if (!seen.contains(name)) {
      throw FormatError(FormatCode::kMissingTensor, 0, name);
    }
  }
}

template <typename Model>
std::vector<NamedTensor> dump(const Model& model) {
  std::vector<NamedTensor> out;
  for (const auto& ref : param_refs(model)) {
    out.push_back({ref.name, *ref.tensor});
  }
  return out;
}

}  // namespace

Checkpoint to_checkpoint(const StoredModel& stored) {
  Checkpoint ckpt;
  ckpt.tensors = std::visit([](const auto& m) { return dump(m); },
                            stored.model);
  ckpt.config_json = model_config_to_json(stored.config);
  return ckpt;
}

namespace {

// Parameter count implied by a config, in floating point so absurd dims in a
// corrupt config cannot overflow.
double implied_parameter_count(const ModelConfig& c) {
  const auto gru = [](double in, double h) {
    return 3 * h * in + 3 * h * h + 3 * h;
  };
  const auto dense = [](double in, double out) { return out * in + out; };
  const auto seq2seq = [&](double in, double emb, double h) {
    return gru(in, h) + 2 * gru(h, h) + gru(emb, h) + dense(h, emb);
  };
  const double a = static_cast<double>(c.dims.audio);
  const double w = static_cast<double>(c.dims.embedding);
  const double h = static_cast<double>(c.dims.hidden);
  const double s = static_cast<double>(c.dims.sentence);
  const double l = static_cast<double>(c.dims.labels);
  if (c.mode == TrainingMode::kPretrainFeatures) return seq2seq(a + w, w, h);
  const double conv = 8.0 * 9 + 8 + 16.0 * 8 * 9 + 16;
  return conv + dense(16, a) + gru(w, s) + (l > 0 ? dense(a + s, l) : 0.0) +
         seq2seq(a + s, w, h);
}

}  // namespace

StoredModel from_checkpoint(const Checkpoint& ckpt) {
  StoredModel out;
  out.config = model_config_from_json(ckpt.config_json);
  const FullDims& d = out.config.dims;
  double stored_values = 0.0;
  for (const auto& t : ckpt.tensors) {
    stored_values += static_cast<double>(t.value.size());
  }
  const double implied = implied_parameter_count(out.config);
  // Only a coarse guard; exact per-tensor checks follow.
  if (implied > stored_values + 1e7) {
    throw FormatError(FormatCode::kDimMismatch, 0,
                      "config implies " + std::to_string(implied) +
                          " parameters, file stores " +
                          std::to_string(stored_values));
  }
  if (out.config.mode == TrainingMode::kPretrainFeatures) {
    Seq2SeqModel m =
        Seq2SeqModel::zeros({d.audio + d.embedding, d.embedding, d.hidden});
    fill_from(ckpt, m);
    out.model = std::move(m);
  } else {
    FullModel m = zero_full_model(d);
    fill_from(ckpt, m);
    out.model = std::move(m);
  }
  return out;
}

void save_model(const StoredModel& stored, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(to_checkpoint(stored), out);
  if (!out) throw DataError("write failed: " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  try {
    return from_checkpoint(read_checkpoint(in));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), e.line(), path.string() + ": " + e.detail());
  }
}

}  // namespace musecap
