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

// Minimal CSV reading: comma separated, optional double-quoted fields,
// '#' comment lines and blank lines skipped.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synseg::csv {

std::vector<std::string> SplitRow(std::string_view line);

/// Rows of `text`; the first row is the header and is checked against
/// `expected_header` (throws kFormat on mismatch).
std::vector<std::vector<std::string>> ParseTable(
    std::string_view text, const std::vector<std::string>& expected_header);

double ParseDouble(const std::string& field);
long long ParseInt(const std::string& field);

std::string ReadFile(const std::string& path);

}  // namespace synseg::csv
