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

/// @file instance.hpp
/// @brief Mask combination and instance post-processing. Connectivity is
/// 8-neighbour throughout.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "synseg/geometry.hpp"
#include "synseg/imaging.hpp"

namespace synseg {

struct PipelineThresholds {
  double t_s = 100.0;  // minimum area, square pixels
  double t_d = 20.0;   // association distance, pixels
  double t_f = 33.0;   // minimum maximum-Feret diameter, pixels
};

/// Whole components of `refined` that share at least one pixel with
/// `alkaline`.
BinaryMask CombineMasks(const BinaryMask& refined, const BinaryMask& alkaline);

/// Drops components with area < t_s.
BinaryMask RemoveSmall(const BinaryMask& mask, double t_s);

/// Labels 1..K in raster order of each component's first pixel.
InstanceMask LabelComponents(const BinaryMask& mask);

/// Merges labels whose pixel sets come within Euclidean distance t_d
/// (inclusive, pixel centres), transitively. Merged groups are numbered in
/// order of their smallest input label; component counts accumulate.
InstanceMask AssociateComponents(const InstanceMask& instances, double t_d);

/// Removes labels whose maximum Feret diameter is below t_f and renumbers
/// the survivors in order.
InstanceMask FilterFeret(const InstanceMask& instances, double t_f);

struct RegionStats {
  std::uint32_t label = 0;
  std::uint64_t area = 0;
  double centroid_x = 0.0;  // tile-local pixel coordinates
  double centroid_y = 0.0;
  std::array<std::int32_t, 4> bbox = {0, 0, 0, 0};  // x0, y0, x1, y1 exclusive
  double feret = 0.0;
  std::uint32_t component_count = 1;
};

/// Pixel lists per label (index label - 1), in raster order.
std::vector<std::vector<PixelPoint>> LabelPixels(const InstanceMask& instances);

std::vector<RegionStats> ComputeRegionStats(const InstanceMask& instances);

}  // namespace synseg
