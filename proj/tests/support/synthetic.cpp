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

#include "synthetic.hpp"

namespace synseg::testing {

StainMixture MakeStainMixture(std::uint64_t seed, int size, double jitter) {
  std::mt19937_64 rng(seed);
  StainMixture out;
  out.generators = DefaultReferenceBasis().w;
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) {
      out.generators(r, c) *= 1.0 + Uniform(rng, -jitter, jitter);
    }
    out.generators.col(c).normalize();
  }
  out.od = OdImage{Image<float>(size, size, 3), "synthetic"};
  out.concentrations = Image<float>(size, size, 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      Eigen::Vector3d h = Eigen::Vector3d::Zero();
      if (Uniform(rng, 0.0, 1.0) < 0.85) {
        const int dominant = UniformInt(rng, 0, 2);
        h[dominant] = Uniform(rng, 0.4, 2.0);
        for (int k = 0; k < 3; ++k) {
          if (k != dominant && Uniform(rng, 0.0, 1.0) < 0.25) {
            h[k] = Uniform(rng, 0.0, 0.3);
          }
        }
      }
      const Eigen::Vector3d v = out.generators * h;
      for (int c = 0; c < 3; ++c) {
        out.od.values.at(x, y, c) = static_cast<float>(v[c]);
        out.concentrations.at(x, y, c) = static_cast<float>(h[c]);
      }
    }
  }
  return out;
}

}  // namespace synseg::testing

namespace synseg::testing {

CrfInstance MakeCrfInstance(std::uint64_t seed, int size) {
  std::mt19937_64 rng(seed);
  CrfInstance out;
  out.tile.pixels = RgbImage(size, size, 3);
  out.tile.tile_id = "crf";
  out.probability = ProbabilityMap{Image<float>(size, size), MapKind::kAttention};

  int background[3];
  for (int& c : background) c = UniformInt(rng, 150, 255);
  struct Blob {
    double cx, cy, rx, ry;
    int color[3];
  };
  std::vector<Blob> blobs(static_cast<std::size_t>(UniformInt(rng, 1, 3)));
  for (auto& b : blobs) {
    b.cx = Uniform(rng, 0, size);
    b.cy = Uniform(rng, 0, size);
    b.rx = Uniform(rng, size * 0.1, size * 0.3);
    b.ry = Uniform(rng, size * 0.1, size * 0.3);
    for (int& c : b.color) c = UniformInt(rng, 20, 200);
  }
  const double noise = Uniform(rng, 2.0, 12.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Blob* inside = nullptr;
      for (const auto& b : blobs) {
        const double dx = (x - b.cx) / b.rx;
        const double dy = (y - b.cy) / b.ry;
        if (dx * dx + dy * dy <= 1.0) inside = &b;
      }
      for (int c = 0; c < 3; ++c) {
        const int base = inside ? inside->color[c] : background[c];
        const int v = base + static_cast<int>(std::lround(Uniform(rng, -noise, noise)));
        out.tile.pixels.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
      double p = inside ? Uniform(rng, 0.55, 0.95) : Uniform(rng, 0.05, 0.45);
      if (Uniform(rng, 0.0, 1.0) < 0.1) p = Uniform(rng, 0.0, 1.0);
      out.probability.values.at(x, y) = static_cast<float>(p);
    }
  }
  return out;
}

}  // namespace synseg::testing

namespace synseg::testing {

std::vector<PixelPoint> RasterDisc(double cx, double cy, double radius, int size) {
  std::vector<PixelPoint> out;
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + radius)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius) {
        out.push_back({x, y});
      }
    }
  }
  return out;
}

std::vector<PixelPoint> RasterLine(double cx, double cy, double length,
                                   double thickness, double angle, int size) {
  std::vector<PixelPoint> out;
  const double ux = std::cos(angle);
  const double uy = std::sin(angle);
  const double reach = length / 2 + thickness;
  for (int y = std::max(0, static_cast<int>(cy - reach));
       y <= std::min(size - 1, static_cast<int>(cy + reach)); ++y) {
    for (int x = std::max(0, static_cast<int>(cx - reach));
         x <= std::min(size - 1, static_cast<int>(cx + reach)); ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const double along = dx * ux + dy * uy;
      const double across = -dx * uy + dy * ux;
      if (std::abs(along) <= length / 2 && std::abs(across) <= thickness / 2) {
        out.push_back({x, y});
      }
    }
  }
  return out;
}

void PaintShape(RgbImage& image, const std::vector<PixelPoint>& pixels,
                const Eigen::Vector3d& od_dir, double concentration,
                std::mt19937_64& rng) {
  for (const auto& p : pixels) {
    const double c = concentration * Uniform(rng, 0.9, 1.1);
    for (int ch = 0; ch < 3; ++ch) {
      const double v = 255.0 * std::exp(-c * od_dir[ch]);
      image.at(p.x, p.y, ch) =
          static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
}

AttentionTensor MakeAttention(const std::vector<double>& token_weight, int grid_side,
                              int heads, std::mt19937_64& rng) {
  AttentionTensor a;
  a.heads = heads;
  a.grid_side = grid_side;
  const int t = a.tokens();
  a.values.assign(static_cast<std::size_t>(heads) * t * t, 1.0f / static_cast<float>(t));
  for (int k = 0; k < heads; ++k) {
    std::vector<double> row(static_cast<std::size_t>(t));
    row[0] = 0.2;
    for (int j = 1; j < t; ++j) {
      row[static_cast<std::size_t>(j)] =
          token_weight[static_cast<std::size_t>(j - 1)] * Uniform(rng, 0.9, 1.1);
    }
    double sum = 0.0;
    for (double v : row) sum += v;
    for (int j = 0; j < t; ++j) {
      a.values[static_cast<std::size_t>(k) * t * t + static_cast<std::size_t>(j)] =
          static_cast<float>(row[static_cast<std::size_t>(j)] / sum);
    }
  }
  return a;
}

SyntheticTile MakeSyntheticTile(std::uint64_t seed, const SyntheticTileOptions& o) {
  std::mt19937_64 rng(seed);
  SyntheticTile out;
  out.tile.pixels = RgbImage(o.size, o.size, 3);
  out.tile.wsi_id = "synthetic";
  out.tile.tile_id = "0_0";
  for (auto& v : out.tile.pixels.data()) {
    v = static_cast<std::uint8_t>(UniformInt(rng, 246, 255));
  }

  const int k = UniformInt(rng, o.min_aggregates, o.max_aggregates);
  const int n_distractors = UniformInt(rng, 0, o.max_distractors);
  std::vector<std::vector<PixelPoint>> placed;
  auto far_enough = [&](const std::vector<PixelPoint>& cand) {
    const double gap2 = o.min_gap * o.min_gap;
    for (const auto& other : placed) {
      for (const auto& a : cand) {
        for (const auto& b : other) {
          if (static_cast<double>(SquaredDistance(a, b)) < gap2) return false;
        }
      }
    }
    return true;
  };
  auto place = [&](bool magenta) -> bool {
    for (int attempt = 0; attempt < 500; ++attempt) {
      SyntheticAggregate agg;
      const double margin = 45.0;
      const double cx = Uniform(rng, margin, o.size - margin);
      const double cy = Uniform(rng, margin, o.size - margin);
      agg.is_line = magenta && Uniform(rng, 0.0, 1.0) < 0.3;
      if (agg.is_line) {
        agg.pixels = RasterLine(cx, cy, Uniform(rng, 40.0, 80.0),
                                Uniform(rng, 7.0, 12.0), Uniform(rng, 0.0, 3.14159), o.size);
      } else {
        agg.pixels = RasterDisc(cx, cy, Uniform(rng, 17.0, 30.0), o.size);
      }
      if (!far_enough(agg.pixels)) continue;
      double sx = 0.0;
      double sy = 0.0;
      for (const auto& p : agg.pixels) {
        sx += p.x;
        sy += p.y;
      }
      agg.centroid_x = sx / static_cast<double>(agg.pixels.size());
      agg.centroid_y = sy / static_cast<double>(agg.pixels.size());
      placed.push_back(agg.pixels);
      (magenta ? out.aggregates : out.distractors).push_back(std::move(agg));
      return true;
    }
    return false;
  };
  for (int i = 0; i < k; ++i) place(true);
  for (int i = 0; i < n_distractors; ++i) place(false);

  const StainBasis refs = DefaultReferenceBasis();
  for (const auto& a : out.aggregates) {
    PaintShape(out.tile.pixels, a.pixels, refs.column(StainRole::kAlkaline),
               Uniform(rng, 0.7, 1.2), rng);
  }
  for (const auto& d : out.distractors) {
    PaintShape(out.tile.pixels, d.pixels, refs.column(StainRole::kDab),
               Uniform(rng, 0.7, 1.2), rng);
  }

  const int g = o.grid_side;
  const int cell = o.size / g;
  std::vector<double> weight(static_cast<std::size_t>(g * g), 0.0);
  for (const auto* group : {&out.aggregates, &out.distractors}) {
    for (const auto& a : *group) {
      for (const auto& p : a.pixels) {
        weight[static_cast<std::size_t>((p.y / cell) * g + p.x / cell)] += 1.0;
      }
    }
  }
  for (auto& w : weight) w = w >= 8.0 ? 1.0 : 0.02;
  out.attention = MakeAttention(weight, g, o.heads, rng);
  return out;
}

}  // namespace synseg::testing
