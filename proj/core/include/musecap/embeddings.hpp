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

#ifndef MUSECAP_EMBEDDINGS_HPP_
#define MUSECAP_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "musecap/tensor.hpp"

namespace musecap {

// End-of-sequence symbol appended to every table used for captioning.
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::uint64_t kEosSeed = 0xE05;

// True for non-empty strings without space, tab, CR or LF.
bool is_valid_token(std::string_view token);

// Immutable word -> vector table. Row i is the embedding of words()[i].
class EmbeddingTable {
 public:
  // Validates: |words| == rows, dim >= 1, tokens valid and unique, all
  // entries finite. Throws DataError / FormatError.
  EmbeddingTable(std::vector<std::string> words, Tensor matrix);

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return matrix_.cols(); }
  const std::vector<std::string>& words() const { return words_; }
  const Tensor& matrix() const { return matrix_; }
  std::span<const double> row(std::size_t i) const { return matrix_.row(i); }
  double row_norm(std::size_t i) const { return norms_[i]; }

  std::optional<std::size_t> index_of(std::string_view token) const;
  // Absent tokens yield nullopt, never a fabricated vector.
  std::optional<std::span<const double>> lookup(std::string_view token) const;
  bool contains(std::string_view token) const {
    return index_of(token).has_value();
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> words_;
  Tensor matrix_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

// Text format: "V D\n" then V lines "token f1 ... fD\n".
EmbeddingTable parse_embedding_text(std::istream& in);
EmbeddingTable load_embedding_file(const std::filesystem::path& path);
void write_embedding_text(const EmbeddingTable& table, std::ostream& out);
void write_embedding_file(const EmbeddingTable& table,
                          const std::filesystem::path& path);

// Returns `table` with kEosToken appended (if absent) using a seeded
// pseudo-random unit vector.
EmbeddingTable with_eos(const EmbeddingTable& table);
std::vector<double> eos_vector(std::size_t dim);

// FNV-1a over the words joined with '\n'.
std::uint64_t vocab_hash(const EmbeddingTable& table);
std::string vocab_hash_hex(const EmbeddingTable& table);

struct BagEmbedding {
  std::vector<double> mean;
  std::size_t known = 0;  // in-vocabulary tokens averaged (K)
  bool no_known_words() const { return known == 0; }
};

// Mean of the in-vocabulary token embeddings, duplicates counted. With no
// known tokens the mean is the zero vector and no_known_words() is set.
BagEmbedding bag_embedding(const EmbeddingTable& table,
                           std::span<const std::string> tokens);

struct NearestWord {
  std::size_t index = 0;
  std::string_view token;
  bool degenerate_query = false;  // zero query, row 0 returned
};

// Cosine argmax over all rows; ties go to the lowest row index. Rows with
// zero norm score 0.
NearestWord nearest_word(const EmbeddingTable& table,
                         std::span<const double> query);

}  // namespace musecap

#endif  // MUSECAP_EMBEDDINGS_HPP_
