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

#ifndef MUSECAP_TEXT_FORMAT_HPP_
#define MUSECAP_TEXT_FORMAT_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "musecap/tensor.hpp"

// Shared lexical rules of the line-oriented text formats: UTF-8 without BOM,
// '\n' line terminators (final one mandatory), fields separated by exactly
// one U+0020, reals written with 17 significant digits.
namespace musecap::textfmt {

// Reads the whole stream and checks encoding and the trailing newline.
std::string read_all(std::istream& in);
std::string read_file(const std::filesystem::path& path);

// Splits validated content into lines without terminators.
std::vector<std::string_view> split_lines(std::string_view content);
std::vector<std::string_view> split_fields(std::string_view line);

// Parses "<a> <b>" with positive base-10 integers.
std::pair<std::size_t, std::size_t> parse_header(std::string_view line);

// Strict decimal real. Throws FormatError(kBadNumber / kNonFinite).
double parse_real(std::string_view field, std::size_t line_no);

void append_real(std::string& out, double v);
std::string format_real(double v);

// Matrix format: "R C" header then R lines of C reals.
Tensor parse_matrix(std::istream& in);
Tensor parse_matrix_file(const std::filesystem::path& path);
void write_matrix(const Tensor& m, std::ostream& out);
void write_matrix_file(const Tensor& m, const std::filesystem::path& path);

}  // namespace musecap::textfmt

#endif  // MUSECAP_TEXT_FORMAT_HPP_
