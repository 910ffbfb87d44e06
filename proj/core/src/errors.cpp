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

#include "musecap/errors.hpp"

namespace musecap {

std::string_view to_string(FormatCode code) {
  switch (code) {
    case FormatCode::kEncoding: return "encoding";
    case FormatCode::kMissingNewline: return "missing-newline";
    case FormatCode::kBadHeader: return "bad-header";
    case FormatCode::kNonPositiveSize: return "non-positive-size";
    case FormatCode::kFieldCount: return "field-count";
    case FormatCode::kBadNumber: return "bad-number";
    case FormatCode::kNonFinite: return "non-finite";
    case FormatCode::kDuplicateToken: return "duplicate-token";
    case FormatCode::kRowCount: return "row-count";
    case FormatCode::kBadMagic: return "bad-magic";
    case FormatCode::kBadVersion: return "bad-version";
    case FormatCode::kTruncated: return "truncated";
    case FormatCode::kBadConfig: return "bad-config";
    case FormatCode::kDuplicateTensor: return "duplicate-tensor";
    case FormatCode::kMissingTensor: return "missing-tensor";
    case FormatCode::kUnknownTensor: return "unknown-tensor";
    case FormatCode::kDimMismatch: return "dim-mismatch";
    case FormatCode::kTrailingBytes: return "trailing-bytes";
  }
  return "unknown";
}

namespace {

std::string format_message(FormatCode code, std::size_t line,
                           const std::string& detail) {
  std::string msg(to_string(code));
  if (line > 0) msg += " at line " + std::to_string(line);
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

FormatError::FormatError(FormatCode code, std::size_t line,
                         const std::string& detail)
    : DataError(format_message(code, line, detail)),
      code_(code),
      line_(line),
      detail_(detail) {}

}  // namespace musecap
