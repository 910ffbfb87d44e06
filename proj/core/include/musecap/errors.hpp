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

#ifndef MUSECAP_ERRORS_HPP_
#define MUSECAP_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace musecap {

// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  kConfig,     // invalid configuration value
  kData,       // unreadable, malformed or inconsistent input data
  kDimension,  // tensor/vector shapes do not agree
  kNumerical,  // non-finite value where a finite one is required
  kState,      // API misuse, e.g. a stale backward cache
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message)
      : Error(ErrorKind::kDimension, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorKind::kNumerical, message) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& message)
      : Error(ErrorKind::kState, message) {}
};

// Fine-grained classes for the text and binary file formats.
enum class FormatCode {
  // text formats (embeddings, spectrograms, feature vectors)
  kEncoding,         // BOM or invalid UTF-8
  kMissingNewline,   // file does not end with '\n'
  kBadHeader,        // first line is not "<a> <b>"
  kNonPositiveSize,  // header size <= 0
  kFieldCount,       // wrong number of fields on a line
  kBadNumber,        // field is not a decimal real
  kNonFinite,        // NaN, infinity or out-of-range value
  kDuplicateToken,
  kRowCount,         // too few or too many rows
  // checkpoint format
  kBadMagic,
  kBadVersion,
  kTruncated,
  kBadConfig,
  kDuplicateTensor,
  kMissingTensor,
  kUnknownTensor,
  kDimMismatch,
  kTrailingBytes,
};

std::string_view to_string(FormatCode code);

class FormatError : public DataError {
 public:
  // line == 0 means "no line information" (binary formats).
  FormatError(FormatCode code, std::size_t line, const std::string& detail);

  FormatCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  FormatCode code_;
  std::size_t line_;
  std::string detail_;
};

}  // namespace musecap

#endif  // MUSECAP_ERRORS_HPP_
