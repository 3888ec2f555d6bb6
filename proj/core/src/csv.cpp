// Copyright 2026 The synseg Authors. All Rights Reserved.
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

#include "synseg/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "synseg/error.hpp"

namespace synseg::csv {

std::vector<std::string> SplitRow(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back().push_back(c);
    }
  }
  if (quoted) throw Error(ErrorCode::kFormat, "unterminated quote in CSV row");
  return out;
}

std::vector<std::vector<std::string>> ParseTable(
    std::string_view text, const std::vector<std::string>& expected_header) {
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto row = SplitRow(line);
    if (!header_seen) {
      if (row != expected_header) {
        throw Error(ErrorCode::kFormat, "unexpected CSV header at line " +
                                            std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    if (row.size() != expected_header.size()) {
      throw Error(ErrorCode::kFormat,
                  "CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(row.size()) + " fields");
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorCode::kFormat, "CSV header missing");
  return rows;
}

double ParseDouble(const std::string& field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos == field.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kFormat, "not a number: '" + field + "'");
}

long long ParseInt(const std::string& field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kFormat, "not an integer: '" + field + "'");
  }
  return v;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace synseg::csv
