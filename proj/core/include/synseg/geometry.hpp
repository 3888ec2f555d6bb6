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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace synseg {

struct PixelPoint {
  std::int32_t x = 0;
  std::int32_t y = 0;
  auto operator<=>(const PixelPoint&) const = default;
};

inline std::int64_t SquaredDistance(PixelPoint a, PixelPoint b) noexcept {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Counter-clockwise hull (y up) without collinear points (monotone chain).
/// Duplicates are ignored; one or two distinct points are returned as is.
std::vector<PixelPoint> ConvexHull(std::span<const PixelPoint> points);

/// Largest squared distance between any two points: rotating calipers over
/// the convex hull, exact in integer arithmetic.
std::int64_t MaxSquaredDiameter(std::span<const PixelPoint> points);

/// Maximum Feret diameter between pixel centres. Throws kEmptyInput on an
/// empty set.
double FeretDiameter(std::span<const PixelPoint> points);

}  // namespace synseg
