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

/// @file attention.hpp
/// @brief Class-token attention to probability map and preliminary mask.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "synseg/imaging.hpp"
#include "synseg/spt.hpp"

namespace synseg {

/// Last-layer self-attention of an external ViT: heads x (N+1) x (N+1),
/// row-major, with N = grid_side^2 patch tokens plus one class token.
struct AttentionTensor {
  std::vector<float> values;
  int heads = 0;
  int grid_side = 0;
  int cls_index = 0;

  int tokens() const noexcept { return grid_side * grid_side + 1; }
  float at(int head, int row, int col) const noexcept {
    const auto t = static_cast<std::size_t>(tokens());
    return values[(static_cast<std::size_t>(head) * t + row) * t + col];
  }
};

/// Throws kShape unless the tensor is [h, g^2+1, g^2+1] with h >= 1.
AttentionTensor AttentionFromTensor(const Tensor& tensor, int grid_side,
                                    int cls_index = 0);

/// Throws kShape when any entry is negative or a row sum deviates from 1 by
/// more than `tolerance`.
void ValidateAttention(const AttentionTensor& a, double tolerance = 1e-4);

/// Mean over heads of the class-token row, class-token column removed.
std::vector<double> ClassAttention(const AttentionTensor& a);

/// Reshapes to grid_side x grid_side (row-major, token k at row k / g,
/// column k % g), resizes bilinearly with pixel-centre alignment
///   src = (dst + 0.5) * g / out - 0.5, clamped to [0, g - 1],
/// then min-max rescales to [0, 1]. Constant input yields all zeros.
ProbabilityMap AttentionToMap(std::span<const double> a_cls, int grid_side,
                              int out_height, int out_width);

inline constexpr double kDefaultTau = 0.1;

/// p >= tau.
BinaryMask ThresholdAttention(const ProbabilityMap& p, double tau = kDefaultTau);

struct TileScore {
  std::string wsi_id;
  std::string tile_id;
  double score = 0.0;
};

/// CSV with header `wsi_id,tile_id,score`. Throws kFormat on malformed rows,
/// out-of-range scores or duplicate (wsi_id, tile_id) pairs.
std::vector<TileScore> ReadTileScores(const std::filesystem::path& path);
std::vector<TileScore> ParseTileScores(const std::string& csv);

inline constexpr double kDefaultTileCutoff = 0.5;

/// Tiles with score >= cutoff, sorted by (wsi_id, tile_id).
std::vector<TileScore> SelectPositiveTiles(std::vector<TileScore> manifest,
                                           double cutoff = kDefaultTileCutoff);

}  // namespace synseg
