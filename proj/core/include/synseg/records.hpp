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

/// @file records.hpp
/// @brief Aggregate records and the `aggregates.jsonl` manifest.
///
/// One JSON object per line:
///   {"aggregate_id", "wsi_id", "tile_id", "centroid": [x, y], "area",
///    "feret", "bbox": [x0, y0, x1, y1], "component_count", "patch_ref",
///    "label": ClassLabel | null, "mask_rating": "Good"|"Medium"|"Bad" | null}
/// Coordinates are slide pixels; bbox end coordinates are exclusive.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synseg/labels.hpp"

namespace synseg {

struct AggregateRecord {
  std::string aggregate_id;
  std::string wsi_id;
  std::string tile_id;
  std::array<double, 2> centroid = {0.0, 0.0};
  std::uint64_t area = 0;
  double feret = 0.0;
  std::array<std::int64_t, 4> bbox = {0, 0, 0, 0};
  std::uint32_t component_count = 1;
  std::string patch_ref;
  std::optional<ClassLabel> label;
  std::optional<MaskRating> mask_rating;

  bool operator==(const AggregateRecord&) const = default;
};

std::string RecordToJson(const AggregateRecord& record);
/// Throws kFormat on malformed input.
AggregateRecord RecordFromJson(std::string_view line);

std::vector<AggregateRecord> ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const std::vector<AggregateRecord>& records);

}  // namespace synseg
