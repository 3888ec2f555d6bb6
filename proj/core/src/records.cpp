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

#include "synseg/records.hpp"

#include <fstream>

#include "json.hpp"
#include "synseg/error.hpp"

namespace synseg {

std::string RecordToJson(const AggregateRecord& r) {
  nlohmann::ordered_json j;
  j["aggregate_id"] = r.aggregate_id;
  j["wsi_id"] = r.wsi_id;
  j["tile_id"] = r.tile_id;
  j["centroid"] = r.centroid;
  j["area"] = r.area;
  j["feret"] = r.feret;
  j["bbox"] = r.bbox;
  j["component_count"] = r.component_count;
  j["patch_ref"] = r.patch_ref;
  j["label"] = r.label ? nlohmann::ordered_json(ClassLabelName(*r.label)) : nullptr;
  j["mask_rating"] =
      r.mask_rating ? nlohmann::ordered_json(MaskRatingName(*r.mask_rating)) : nullptr;
  return j.dump();
}

AggregateRecord RecordFromJson(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    AggregateRecord r;
    r.aggregate_id = j.at("aggregate_id").get<std::string>();
    r.wsi_id = j.value("wsi_id", std::string{});
    r.tile_id = j.value("tile_id", std::string{});
    if (j.contains("centroid")) r.centroid = j["centroid"].get<std::array<double, 2>>();
    r.area = j.value("area", std::uint64_t{0});
    r.feret = j.value("feret", 0.0);
    if (j.contains("bbox")) r.bbox = j["bbox"].get<std::array<std::int64_t, 4>>();
    r.component_count = j.value("component_count", std::uint32_t{1});
    r.patch_ref = j.value("patch_ref", std::string{});
    if (j.contains("label") && !j["label"].is_null()) {
      const auto name = j["label"].get<std::string>();
      r.label = ParseClassLabel(name);
      if (!r.label) throw Error(ErrorCode::kInvalidLabel, "unknown class label '" + name + "'");
    }
    if (j.contains("mask_rating") && !j["mask_rating"].is_null()) {
      const auto name = j["mask_rating"].get<std::string>();
      r.mask_rating = ParseMaskRating(name);
      if (!r.mask_rating) throw Error(ErrorCode::kFormat, "unknown mask rating '" + name + "'");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad aggregate record: ") + e.what());
  }
}

std::vector<AggregateRecord> ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<AggregateRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(RecordFromJson(line));
  }
  return out;
}

void WriteManifest(const std::filesystem::path& path,
                   const std::vector<AggregateRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  for (const auto& r : records) out << RecordToJson(r) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace synseg
