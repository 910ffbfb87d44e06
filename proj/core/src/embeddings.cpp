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

#include "musecap/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "musecap/errors.hpp"
#include "musecap/random.hpp"
#include "musecap/text_format.hpp"

namespace musecap {

bool is_valid_token(std::string_view token) {
  return !token.empty() &&
         token.find_first_of(" \t\r\n") == std::string_view::npos;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Tensor matrix)
    : words_(std::move(words)), matrix_(std::move(matrix)) {
  if (matrix_.rank() != 2) {
    throw DataError("embedding matrix must be rank 2");
  }
  if (matrix_.rows() != words_.size()) {
    throw DataError("embedding table has " + std::to_string(words_.size()) +
                    " words but " + std::to_string(matrix_.rows()) + " rows");
  }
  if (!matrix_.all_finite()) {
    throw FormatError(FormatCode::kNonFinite, 0, "embedding matrix");
  }
  index_.reserve(words_.size());
  norms_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!is_valid_token(words_[i])) {
      throw DataError("invalid token at row " + std::to_string(i));
    }
    if (!index_.emplace(words_[i], i).second) {
      throw FormatError(FormatCode::kDuplicateToken, 0, words_[i]);
    }
    norms_.push_back(linalg::norm(matrix_.row(i)));
  }
}

std::optional<std::size_t> EmbeddingTable::index_of(
    std::string_view token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const double>> EmbeddingTable::lookup(
    std::string_view token) const {
  const auto i = index_of(token);
  if (!i) return std::nullopt;
  return row(*i);
}

EmbeddingTable parse_embedding_text(std::istream& in) {
  const std::string content = textfmt::read_all(in);
  const auto lines = textfmt::split_lines(content);
  const auto [vocab, dim] = textfmt::parse_header(lines[0]);

  std::vector<std::string> words;
  std::vector<double> values;
  words.reserve(vocab);
  values.reserve(vocab * dim);
  std::unordered_map<std::string_view, std::size_t> seen;

  const std::size_t present = std::min(lines.size() - 1, vocab);
  for (std::size_t r = 0; r < present; ++r) {
    const std::size_t line_no = r + 2;
    const auto fields = textfmt::split_fields(lines[r + 1]);
    if (fields.size() != dim + 1) {
      throw FormatError(FormatCode::kFieldCount, line_no,
                        "expected token and " + std::to_string(dim) +
                            " values, found " +
                            std::to_string(fields.size()) + " fields");
    }
    if (!is_valid_token(fields[0])) {
      throw FormatError(FormatCode::kFieldCount, line_no,
                        "empty or invalid token");
    }
    if (const auto [it, fresh] = seen.emplace(fields[0], line_no); !fresh) {
      throw FormatError(FormatCode::kDuplicateToken, line_no,
                        "'" + std::string(fields[0]) + "' first seen at line " +
                            std::to_string(it->second));
    }
    words.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      values.push_back(textfmt::parse_real(fields[k], line_no));
    }
  }
  if (lines.size() - 1 != vocab) {
    throw FormatError(FormatCode::kRowCount, present + 2,
                      "header declares " + std::to_string(vocab) +
                          " words, found " + std::to_string(lines.size() - 1));
  }
  return EmbeddingTable(std::move(words),
                        Tensor::matrix(vocab, dim, std::move(values)));
}

EmbeddingTable load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file " + path.string());
  try {
    return parse_embedding_text(in);
  } catch (const FormatError& e) {
    throw FormatError(e.code(), e.line(), path.string() + ": " + e.detail());
  }
}

void write_embedding_text(const EmbeddingTable& table, std::ostream& out) {
  std::string s = std::to_string(table.size()) + " " +
                  std::to_string(table.dim()) + "\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    s += table.words()[i];
    for (double v : table.row(i)) {
      s += ' ';
      textfmt::append_real(s, v);
    }
    s += '\n';
  }
  out << s;
}

void write_embedding_file(const EmbeddingTable& table,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_embedding_text(table, out);
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<double> eos_vector(std::size_t dim) {
  Rng rng(kEosSeed);
  std::vector<double> v(dim);
  double n = 0.0;
  while (n == 0.0) {
    for (double& x : v) x = rng.normal();
    n = linalg::norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

EmbeddingTable with_eos(const EmbeddingTable& table) {
  if (table.contains(kEosToken)) return table;
  std::vector<std::string> words = table.words();
  words.emplace_back(kEosToken);
  std::vector<double> values = table.matrix().raw();
  const auto eos = eos_vector(table.dim());
  values.insert(values.end(), eos.begin(), eos.end());
  return EmbeddingTable(std::move(words),
                        Tensor::matrix(table.size() + 1, table.dim(),
                                       std::move(values)));
}

std::uint64_t vocab_hash(const EmbeddingTable& table) {
  std::uint64_t h = fnv1a64("");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i) h = fnv1a64("\n", h);
    h = fnv1a64(table.words()[i], h);
  }
  return h;
}

std::string vocab_hash_hex(const EmbeddingTable& table) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(vocab_hash(table)));
  return buf;
}

BagEmbedding bag_embedding(const EmbeddingTable& table,
                           std::span<const std::string> tokens) {
  BagEmbedding out;
  out.mean.assign(table.dim(), 0.0);
  for (const auto& t : tokens) {
    if (const auto v = table.lookup(t)) {
      linalg::add_to(*v, out.mean);
      ++out.known;
    }
  }
  if (out.known > 0) {
    const double k = static_cast<double>(out.known);
    for (double& x : out.mean) x /= k;
  }
  return out;
}

NearestWord nearest_word(const EmbeddingTable& table,
                         std::span<const double> query) {
  if (table.size() == 0) throw DataError("nearest_word: empty table");
  require_same_size(query.size(), table.dim(), "nearest_word query");
  if (!all_finite(query)) {
    throw NumericalError("nearest_word: non-finite query");
  }
  const double qn = linalg::norm(query);
  if (qn == 0.0) return {0, table.words()[0], true};

  std::size_t best = 0;
  double best_score = -INFINITY;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double rn = table.row_norm(i);
    const double score =
        rn > 0.0 ? linalg::dot(query, table.row(i)) / (qn * rn) : 0.0;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return {best, table.words()[best], false};
}

}  // namespace musecap
