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

#include "synseg/attention.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "synseg/csv.hpp"

namespace synseg {

AttentionTensor AttentionFromTensor(const Tensor& tensor, int grid_side,
                                    int cls_index) {
  if (grid_side <= 0) throw Error(ErrorCode::kShape, "grid side must be positive");
  const auto& shape = tensor.shape();
  const std::int64_t tokens = static_cast<std::int64_t>(grid_side) * grid_side + 1;
  if (shape.size() != 3 || shape[0] < 1 || shape[1] != tokens ||
      shape[2] != tokens) {
    throw Error(ErrorCode::kShape,
                "attention tensor must be [h, " + std::to_string(tokens) + ", " +
                    std::to_string(tokens) + "] for grid side " +
                    std::to_string(grid_side));
  }
  if (cls_index < 0 || cls_index >= tokens) {
    throw Error(ErrorCode::kShape, "class-token index out of range");
  }
  const auto values = tensor.f32();
  return AttentionTensor{std::vector<float>(values.begin(), values.end()),
                         static_cast<int>(shape[0]), grid_side, cls_index};
}

void ValidateAttention(const AttentionTensor& a, double tolerance) {
  const int t = a.tokens();
  if (a.values.size() != static_cast<std::size_t>(a.heads) * t * t) {
    throw Error(ErrorCode::kShape, "attention value count mismatch");
  }
  for (int k = 0; k < a.heads; ++k) {
    for (int r = 0; r < t; ++r) {
      double sum = 0.0;
      for (int c = 0; c < t; ++c) {
        const float v = a.at(k, r, c);
        if (!(v >= 0.0f) || !std::isfinite(v)) {
          throw Error(ErrorCode::kShape, "attention weights must be finite and >= 0");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        throw Error(ErrorCode::kShape,
                    "attention row " + std::to_string(r) + " of head " +
                        std::to_string(k) + " sums to " + std::to_string(sum));
      }
    }
  }
}

std::vector<double> ClassAttention(const AttentionTensor& a) {
  const int t = a.tokens();
  if (a.heads < 1 ||
      a.values.size() != static_cast<std::size_t>(a.heads) * t * t) {
    throw Error(ErrorCode::kShape, "attention tensor does not match N+1 tokens");
  }
  std::vector<double> out(static_cast<std::size_t>(t - 1), 0.0);
  for (int k = 0; k < a.heads; ++k) {
    std::size_t j = 0;
    for (int c = 0; c < t; ++c) {
      if (c == a.cls_index) continue;
      out[j++] += a.at(k, a.cls_index, c);
    }
  }
  for (double& v : out) v /= a.heads;
  return out;
}

ProbabilityMap AttentionToMap(std::span<const double> a_cls, int grid_side,
                              int out_height, int out_width) {
  const auto g = static_cast<std::size_t>(grid_side);
  if (grid_side <= 0 || a_cls.size() != g * g) {
    throw Error(ErrorCode::kShape, "class attention length must equal grid_side^2");
  }
  if (out_height <= 0 || out_width <= 0) {
    throw Error(ErrorCode::kShape, "output size must be positive");
  }

  // Per-axis source taps and weights.
  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [grid_side](int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(grid_side) / out;
    for (int i = 0; i < out; ++i) {
      const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0,
                                    static_cast<double>(grid_side - 1));
      const int lo = static_cast<int>(std::floor(src));
      const int hi = std::min(lo + 1, grid_side - 1);
      t[static_cast<std::size_t>(i)] = {lo, hi, src - lo};
    }
    return t;
  };
  const auto tx = taps(out_width);
  const auto ty = taps(out_height);

  std::vector<double> resized(static_cast<std::size_t>(out_width) * out_height);
  for (int y = 0; y < out_height; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_width; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      auto v = [&](int r, int c) { return a_cls[static_cast<std::size_t>(r) * g + c]; };
      const double top = v(vy.lo, vx.lo) * (1.0 - vx.frac) + v(vy.lo, vx.hi) * vx.frac;
      const double bot = v(vy.hi, vx.lo) * (1.0 - vx.frac) + v(vy.hi, vx.hi) * vx.frac;
      resized[static_cast<std::size_t>(y) * out_width + x] =
          top * (1.0 - vy.frac) + bot * vy.frac;
    }
  }

  ProbabilityMap map{Image<float>(out_width, out_height), MapKind::kAttention};
  const auto [lo_it, hi_it] = std::minmax_element(resized.begin(), resized.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0.0)) return map;
  auto out = map.values.data();
  for (std::size_t i = 0; i < resized.size(); ++i) {
    out[i] = static_cast<float>(std::clamp((resized[i] - lo) / range, 0.0, 1.0));
  }
  return map;
}

BinaryMask ThresholdAttention(const ProbabilityMap& p, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kBadRequest, "tau must lie in (0, 1)");
  }
  BinaryMask out{Image<std::uint8_t>(p.values.width(), p.values.height()),
                 MaskKind::kAttention};
  const auto src = p.values.data();
  auto dst = out.bits.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<double>(src[i]) >= tau ? 1 : 0;
  }
  return out;
}

std::vector<TileScore> ParseTileScores(const std::string& text) {
  std::vector<TileScore> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& row : csv::ParseTable(text, {"wsi_id", "tile_id", "score"})) {
    TileScore s{row[0], row[1], csv::ParseDouble(row[2])};
    if (!(s.score >= 0.0 && s.score <= 1.0)) {
      throw Error(ErrorCode::kFormat, "tile score outside [0, 1] for " + s.tile_id);
    }
    if (!seen.emplace(s.wsi_id, s.tile_id).second) {
      throw Error(ErrorCode::kFormat,
                  "duplicate tile score for " + s.wsi_id + "/" + s.tile_id);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TileScore> ReadTileScores(const std::filesystem::path& path) {
  return ParseTileScores(csv::ReadFile(path.string()));
}

std::vector<TileScore> SelectPositiveTiles(std::vector<TileScore> manifest,
                                           double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) {
    throw Error(ErrorCode::kBadRequest, "cutoff must lie in [0, 1]");
  }
  std::erase_if(manifest, [cutoff](const TileScore& s) { return s.score < cutoff; });
  std::sort(manifest.begin(), manifest.end(), [](const auto& a, const auto& b) {
    return std::tie(a.wsi_id, a.tile_id) < std::tie(b.wsi_id, b.tile_id);
  });
  return manifest;
}

}  // namespace synseg
