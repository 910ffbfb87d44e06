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

#include "musecap/text_format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "musecap/errors.hpp"

namespace musecap::textfmt {

namespace {

// Returns the 1-based line of the first invalid byte, or 0 if valid.
std::size_t first_invalid_utf8_line(std::string_view s) {
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == '\n') ++line;
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return line;
    }
    if (i + extra >= s.size()) return line;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return line;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // overlong forms, surrogates, out of range
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10ffff ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return line;
    }
    i += extra + 1;
  }
  return 0;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::size_t parse_size(std::string_view field) {
  if (field.size() > 1 && field[0] == '-' && all_digits(field.substr(1))) {
    throw FormatError(FormatCode::kNonPositiveSize, 1,
                      "negative size " + std::string(field));
  }
  if (!all_digits(field)) {
    throw FormatError(FormatCode::kBadHeader, 1,
                      "not a base-10 integer: '" + std::string(field) + "'");
  }
  std::size_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError(FormatCode::kBadHeader, 1,
                      "size out of range: " + std::string(field));
  }
  if (v == 0) throw FormatError(FormatCode::kNonPositiveSize, 1, "size is 0");
  return v;
}

}  // namespace

std::string read_all(std::istream& in) {
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read error");
  if (content.empty()) {
    throw FormatError(FormatCode::kBadHeader, 1, "empty input");
  }
  if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    throw FormatError(FormatCode::kEncoding, 1, "byte order mark present");
  }
  if (const std::size_t bad = first_invalid_utf8_line(content); bad != 0) {
    throw FormatError(FormatCode::kEncoding, bad, "invalid UTF-8");
  }
  if (content.back() != '\n') {
    std::size_t lines = 1;
    for (char c : content) lines += (c == '\n');
    throw FormatError(FormatCode::kMissingNewline, lines,
                      "input does not end with a newline");
  }
  return content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_all(in);
  } catch (const FormatError& e) {
    throw FormatError(e.code(), e.line(), path.string() + ": " + e.detail());
  }
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    const std::size_t end = content.find('\n', start);
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(' ', start);
    fields.push_back(line.substr(start, end == std::string_view::npos
                                            ? std::string_view::npos
                                            : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

std::pair<std::size_t, std::size_t> parse_header(std::string_view line) {
  const auto fields = split_fields(line);
  if (fields.size() != 2) {
    throw FormatError(FormatCode::kBadHeader, 1,
                      "expected two space-separated integers");
  }
  return {parse_size(fields[0]), parse_size(fields[1])};
}

double parse_real(std::string_view field, std::size_t line_no) {
  if (field.empty()) {
    throw FormatError(FormatCode::kFieldCount, line_no,
                      "empty field (repeated separator)");
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(),
                                         field.data() + field.size(), v,
                                         std::chars_format::general);
  if (ec == std::errc::result_out_of_range) {
    throw FormatError(FormatCode::kNonFinite, line_no,
                      "value out of range: " + std::string(field));
  }
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError(FormatCode::kBadNumber, line_no,
                      "not a decimal real: '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw FormatError(FormatCode::kNonFinite, line_no,
                      "non-finite value: " + std::string(field));
  }
  return v;
}

void append_real(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

std::string format_real(double v) {
  std::string s;
  append_real(s, v);
  return s;
}

Tensor parse_matrix(std::istream& in) {
  const std::string content = read_all(in);
  const auto lines = split_lines(content);
  const auto [rows, cols] = parse_header(lines[0]);
  std::vector<double> data;
  data.reserve(rows * cols);
  const std::size_t present = std::min(lines.size() - 1, rows);
  for (std::size_t r = 0; r < present; ++r) {
    const std::size_t line_no = r + 2;
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != cols) {
      throw FormatError(FormatCode::kFieldCount, line_no,
                        "expected " + std::to_string(cols) + " values, found " +
                            std::to_string(fields.size()));
    }
    for (auto f : fields) data.push_back(parse_real(f, line_no));
  }
  if (lines.size() - 1 != rows) {
    throw FormatError(FormatCode::kRowCount, present + 2,
                      "expected " + std::to_string(rows) + " rows, found " +
                          std::to_string(lines.size() - 1));
  }
  return Tensor::matrix(rows, cols, std::move(data));
}

Tensor parse_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_matrix(in);
  } catch (const FormatError& e) {
    throw FormatError(e.code(), e.line(), path.string() + ": " + e.detail());
  }
}

void write_matrix(const Tensor& m, std::ostream& out) {
  std::string s = std::to_string(m.rows()) + " " + std::to_string(m.cols()) +
                  "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += ' ';
      append_real(s, row[c]);
    }
    s += '\n';
  }
  out << s;
}

void write_matrix_file(const Tensor& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_matrix(m, out);
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace musecap::textfmt
