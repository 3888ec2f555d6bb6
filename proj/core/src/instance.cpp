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

#include "synseg/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace synseg {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::uint32_t Add() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t Find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller root wins, so roots stay the earliest member.
  void Union(std::uint32_t a, std::uint32_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

void CheckSameShape(const BinaryMask& a, const BinaryMask& b) {
  if (!a.bits.same_shape(b.bits)) {
    throw Error(ErrorCode::kShape, "masks differ in shape");
  }
}

// Maps each input label to its group's new label (0 = dropped), renumbering
// kept groups in ascending order of their representative.
InstanceMask Relabel(const InstanceMask& in, const std::vector<std::uint32_t>& mapping,
                     std::uint32_t new_count,
                     std::vector<std::uint32_t> component_counts) {
  InstanceMask out{Image<std::uint32_t>(in.labels.width(), in.labels.height()),
                   new_count, std::move(component_counts)};
  const auto src = in.labels.data();
  auto dst = out.labels.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = mapping[src[i]];
  return out;
}

}  // namespace

InstanceMask LabelComponents(const BinaryMask& mask) {
  const int w = mask.bits.width();
  const int h = mask.bits.height();
  InstanceMask out{Image<std::uint32_t>(w, h), 0, {}};
  auto& lab = out.labels;
  DisjointSets sets(1);  // provisional label 0 is background

  // First pass: provisional labels from the already-visited neighbours
  // (W, NW, N, NE).
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.bits.at(x, y)) continue;
      std::uint32_t cur = 0;
      const int nbr[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
      for (const auto& d : nbr) {
        const int nx = x + d[0];
        const int ny = y + d[1];
        if (nx < 0 || ny < 0 || nx >= w) continue;
        const std::uint32_t l = lab.at(nx, ny);
        if (l == 0) continue;
        if (cur == 0) {
          cur = l;
        } else {
          sets.Union(cur, l);
        }
      }
      lab.at(x, y) = cur ? cur : sets.Add();
    }
  }

  // Second pass: final labels in raster order of first pixel.
  std::unordered_map<std::uint32_t, std::uint32_t> final_label;
  for (auto& v : lab.data()) {
    if (v == 0) continue;
    const auto root = sets.Find(v);
    auto [it, inserted] = final_label.try_emplace(root, out.label_count + 1);
    if (inserted) ++out.label_count;
    v = it->second;
  }
  return out;
}

BinaryMask CombineMasks(const BinaryMask& refined, const BinaryMask& alkaline) {
  CheckSameShape(refined, alkaline);
  const auto inst = LabelComponents(refined);
  std::vector<std::uint8_t> keep(inst.label_count + 1, 0);
  const auto labels = inst.labels.data();
  const auto alk = alkaline.bits.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] && alk[i]) keep[labels[i]] = 1;
  }
  BinaryMask out{Image<std::uint8_t>(refined.bits.width(), refined.bits.height()),
                 MaskKind::kCombined};
  auto dst = out.bits.data();
  for (std::size_t i = 0; i < labels.size(); ++i) dst[i] = keep[labels[i]];
  return out;
}

BinaryMask RemoveSmall(const BinaryMask& mask, double t_s) {
  if (!(t_s >= 0.0)) throw Error(ErrorCode::kBadRequest, "t_s must be >= 0");
  const auto inst = LabelComponents(mask);
  std::vector<std::uint64_t> area(inst.label_count + 1, 0);
  const auto labels = inst.labels.data();
  for (auto l : labels) ++area[l];
  BinaryMask out{Image<std::uint8_t>(mask.bits.width(), mask.bits.height()),
                 mask.provenance};
  auto dst = out.bits.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    dst[i] = labels[i] != 0 && static_cast<double>(area[labels[i]]) >= t_s;
  }
  return out;
}

std::vector<std::vector<PixelPoint>> LabelPixels(const InstanceMask& instances) {
  std::vector<std::vector<PixelPoint>> out(instances.label_count);
  const auto& lab = instances.labels;
  for (int y = 0; y < lab.height(); ++y) {
    for (int x = 0; x < lab.width(); ++x) {
      const auto l = lab.at(x, y);
      if (l == 0) continue;
      if (l > instances.label_count) {
        throw Error(ErrorCode::kShape, "label exceeds label_count");
      }
      out[l - 1].push_back({x, y});
    }
  }
  return out;
}

InstanceMask AssociateComponents(const InstanceMask& instances, double t_d) {
  if (!(t_d >= 0.0)) throw Error(ErrorCode::kBadRequest, "t_d must be >= 0");
  const auto& lab = instances.labels;
  const int w = lab.width();
  const int h = lab.height();
  const std::uint32_t k = instances.label_count;

  // Closest pairs between disjoint 8-connected sets are always boundary
  // pixels (some 8-neighbour outside the set), so only those are compared.
  struct BoundaryPixel {
    PixelPoint p;
    std::uint32_t label;
  };
  std::vector<BoundaryPixel> boundary;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto l = lab.at(x, y);
      if (l == 0) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy) {
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          edge = nx < 0 || ny < 0 || nx >= w || ny >= h || lab.at(nx, ny) != l;
        }
      }
      if (edge) boundary.push_back({{x, y}, l});
    }
  }

  DisjointSets sets(k + 1);
  const std::int64_t reach = static_cast<std::int64_t>(std::floor(t_d));
  const double t_d2 = t_d * t_d;
  if (reach >= 1 && k > 1) {
    // Bucket boundary pixels on a grid of cell side `cell`; a pixel within
    // t_d lies in the 3x3 block of cells around it.
    const std::int64_t cell = std::max<std::int64_t>(reach, 1);
    const std::int64_t gw = (w + cell - 1) / cell;
    const std::int64_t gh = (h + cell - 1) / cell;
    std::vector<std::vector<std::uint32_t>> grid(static_cast<std::size_t>(gw * gh));
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      const auto& b = boundary[i];
      grid[static_cast<std::size_t>((b.p.y / cell) * gw + b.p.x / cell)].push_back(
          static_cast<std::uint32_t>(i));
    }
    for (const auto& b : boundary) {
      const std::int64_t cx = b.p.x / cell;
      const std::int64_t cy = b.p.y / cell;
      for (std::int64_t gy = std::max<std::int64_t>(cy - 1, 0);
           gy <= std::min(cy + 1, gh - 1); ++gy) {
        for (std::int64_t gx = std::max<std::int64_t>(cx - 1, 0);
             gx <= std::min(cx + 1, gw - 1); ++gx) {
          for (auto idx : grid[static_cast<std::size_t>(gy * gw + gx)]) {
            const auto& o = boundary[idx];
            if (o.label <= b.label) continue;
            if (static_cast<double>(SquaredDistance(b.p, o.p)) <= t_d2 &&
                sets.Find(o.label) != sets.Find(b.label)) {
              sets.Union(b.label, o.label);
            }
          }
        }
      }
    }
  }

  std::vector<std::uint32_t> mapping(k + 1, 0);
  std::vector<std::uint32_t> group_label(k + 1, 0);
  std::vector<std::uint32_t> counts;
  std::uint32_t next = 0;
  for (std::uint32_t l = 1; l <= k; ++l) {
    const auto root = sets.Find(l);
    if (group_label[root] == 0) {
      group_label[root] = ++next;
      counts.push_back(0);
    }
    mapping[l] = group_label[root];
    counts[group_label[root] - 1] += instances.components_of(l);
  }
  return Relabel(instances, mapping, next, std::move(counts));
}

InstanceMask FilterFeret(const InstanceMask& instances, double t_f) {
  if (!(t_f >= 0.0)) throw Error(ErrorCode::kBadRequest, "t_f must be >= 0");
  const auto pixels = LabelPixels(instances);
  std::vector<std::uint32_t> mapping(instances.label_count + 1, 0);
  std::vector<std::uint32_t> counts;
  std::uint32_t next = 0;
  for (std::uint32_t l = 1; l <= instances.label_count; ++l) {
    const auto& px = pixels[l - 1];
    if (px.empty()) continue;
    if (FeretDiameter(px) < t_f) continue;
    mapping[l] = ++next;
    counts.push_back(instances.components_of(l));
  }
  return Relabel(instances, mapping, next, std::move(counts));
}

std::vector<RegionStats> ComputeRegionStats(const InstanceMask& instances) {
  const auto pixels = LabelPixels(instances);
  std::vector<RegionStats> out;
  out.reserve(pixels.size());
  for (std::uint32_t l = 1; l <= instances.label_count; ++l) {
    const auto& px = pixels[l - 1];
    if (px.empty()) continue;
    RegionStats s;
    s.label = l;
    s.area = px.size();
    double sx = 0.0;
    double sy = 0.0;
    s.bbox = {px[0].x, px[0].y, px[0].x + 1, px[0].y + 1};
    for (const auto& p : px) {
      sx += p.x;
      sy += p.y;
      s.bbox[0] = std::min(s.bbox[0], p.x);
      s.bbox[1] = std::min(s.bbox[1], p.y);
      s.bbox[2] = std::max(s.bbox[2], p.x + 1);
      s.bbox[3] = std::max(s.bbox[3], p.y + 1);
    }
    s.centroid_x = sx / static_cast<double>(px.size());
    s.centroid_y = sy / static_cast<double>(px.size());
    s.feret = FeretDiameter(px);
    s.component_count = instances.components_of(l);
    out.push_back(s);
  }
  return out;
}

}  // namespace synseg
