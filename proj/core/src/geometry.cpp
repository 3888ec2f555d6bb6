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

#include "synseg/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "synseg/error.hpp"

namespace synseg {
namespace {

std::int64_t Cross(PixelPoint o, PixelPoint a, PixelPoint b) {
  return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) -
         static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<PixelPoint> ConvexHull(std::span<const PixelPoint> points) {
  std::vector<PixelPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<PixelPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && Cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && Cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::int64_t MaxSquaredDiameter(std::span<const PixelPoint> points) {
  const auto hull = ConvexHull(points);
  const std::size_t n = hull.size();
  if (n < 2) return 0;
  if (n == 2) return SquaredDistance(hull[0], hull[1]);

  // For each hull edge (i, i+1) advance the antipodal vertex k while the
  // triangle area keeps growing; every antipodal pair is visited.
  std::int64_t best = 0;
  std::size_t k = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    while (Cross(hull[i], hull[j], hull[(k + 1) % n]) >
           Cross(hull[i], hull[j], hull[k])) {
      k = (k + 1) % n;
    }
    best = std::max({best, SquaredDistance(hull[i], hull[k]),
                     SquaredDistance(hull[j], hull[k])});
  }
  return best;
}

double FeretDiameter(std::span<const PixelPoint> points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyInput, "Feret diameter of empty set");
  return std::sqrt(static_cast<double>(MaxSquaredDiameter(points)));
}

}  // namespace synseg
