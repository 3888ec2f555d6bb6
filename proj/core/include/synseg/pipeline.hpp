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

/// @file pipeline.hpp
/// @brief Per-tile segmentation chain and the slide-level runner.
///
/// Stage order: stain decomposition -> attention map -> CRF refinement ->
/// combination with the alkaline mask -> small-object removal -> labelling
/// -> association -> Feret filter -> records and patches.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synseg/attention.hpp"
#include "synseg/crf.hpp"
#include "synseg/instance.hpp"
#include "synseg/records.hpp"
#include "synseg/stain.hpp"
#include "synseg/tile_store.hpp"

namespace synseg {

struct PipelineOptions {
  PipelineThresholds thresholds;
  CrfParams crf;
  CrfMode crf_mode = CrfMode::kFast;
  SnmfOptions snmf;
  /// Reuse one basis (for example per slide) instead of fitting per tile.
  std::optional<StainBasis> fixed_basis;
  double alkaline_percentile = kDefaultAlkalinePercentile;
  double concentration_floor = kDefaultConcentrationFloor;
  double tau = kDefaultTau;
  bool extract_patches = true;
  bool keep_intermediates = false;
};

struct PipelineIntermediates {
  ProbabilityMap alkaline_probability;
  BinaryMask alkaline;
  ProbabilityMap attention_probability;
  BinaryMask attention;
  BinaryMask refined;
  BinaryMask combined;
};

struct PipelineResult {
  InstanceMask instances;
  std::vector<AggregateRecord> records;
  std::vector<Patch> patches;  // parallel to records when extracted
  std::optional<PipelineIntermediates> intermediates;
  std::optional<StainBasis> basis;  // empty when the tile had no tissue
};

/// Stable id for aggregate `label` of a tile: "<wsi_id>_<tile_id>_<label:03>".
std::string AggregateIdFor(const std::string& wsi_id, const std::string& tile_id,
                           std::uint32_t label);

/// Runs the full chain on one tile. Errors carry the failing stage name
/// ("stain", "attention", "crf", "postprocess", "patches"). A tile with too
/// little tissue for stain decomposition yields an empty alkaline mask.
/// Patches are cut from `store` when given, else from the tile alone.
PipelineResult RunPipeline(const Tile& tile, const AttentionTensor& attention,
                           const PipelineOptions& options,
                           const TileStore* store = nullptr);

struct SegmentOptions {
  PipelineOptions pipeline;
  double tile_cutoff = kDefaultTileCutoff;
  int workers = 1;
  int cls_index = 0;
};

struct SegmentSummary {
  std::size_t tiles_processed = 0;
  std::size_t aggregates = 0;
};

/// Segments every positive tile of one slide directory. Attention tensors
/// are read from `<wsi>/attention/<tile_id>.spt` (grid side inferred from
/// the shape). Writes `<out>/masks/<tile_id>.png` (16-bit labels),
/// `<out>/patches/<aggregate_id>.png` and `<out>/aggregates.jsonl` with
/// records ordered by (tile_id, aggregate_id).
SegmentSummary SegmentWsi(const DirectoryTileStore& store,
                          const std::vector<TileScore>& scores,
                          const SegmentOptions& options,
                          const std::filesystem::path& out_dir);

/// g with g^2 + 1 == tensor.shape()[1]; throws kShape otherwise.
int InferGridSide(const Tensor& attention);

}  // namespace synseg
