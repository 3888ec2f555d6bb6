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

// Seeded generators shared by the unit and acceptance suites.

#pragma once

#include <cstdint>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "synseg/geometry.hpp"
#include "synseg/imaging.hpp"
#include "synseg/stain.hpp"

namespace synseg::testing {

/// Uniform double in [lo, hi) from raw engine output (portable).
inline double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int UniformInt(std::mt19937_64& rng, int lo, int hi_inclusive) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi_inclusive - lo + 1));
}

struct StainMixture {
  OdImage od;
  Eigen::Matrix3d generators;  // unit columns in StainRole order
  Image<float> concentrations; // 3 channels
};

/// OD image mixing three unit stain vectors (references jittered by up to
/// `jitter` per component) with sparse nonnegative concentrations: each
/// tissue pixel carries one dominant stain plus occasional weak others.
StainMixture MakeStainMixture(std::uint64_t seed, int size, double jitter = 0.1);

}  // namespace synseg::testing

namespace synseg::testing {

struct CrfInstance {
  Tile tile;
  ProbabilityMap probability;
};

/// Random blobs of distinct colour on a noisy background, with a noisy
/// probability map that is mostly high inside blobs and low outside.
CrfInstance MakeCrfInstance(std::uint64_t seed, int size);

}  // namespace synseg::testing

#include "synseg/attention.hpp"

namespace synseg::testing {

struct SyntheticAggregate {
  bool is_line = false;
  double centroid_x = 0.0;  // of the rasterized pixel set, tile-local
  double centroid_y = 0.0;
  std::vector<PixelPoint> pixels;
};

struct SyntheticTile {
  Tile tile;
  AttentionTensor attention;
  std::vector<SyntheticAggregate> aggregates;  // magenta ground truth
  std::vector<SyntheticAggregate> distractors; // brown (DAB) blobs
};

struct SyntheticTileOptions {
  int size = 1024;
  int grid_side = 32;
  int heads = 2;
  int min_aggregates = 0;
  int max_aggregates = 10;
  int max_distractors = 2;
  /// Minimum pixel-centre distance between any two shapes.
  double min_gap = 24.0;
};

/// White tile with K magenta discs/lines (K uniform in [min, max]) plus a few
/// brown distractor discs, and a class-token attention tensor that is high
/// over every shape (magenta or brown) and low elsewhere.
SyntheticTile MakeSyntheticTile(std::uint64_t seed, const SyntheticTileOptions& options = {});

/// Renders pixels of `shape` with stain vector `od_dir` into the tile.
void PaintShape(RgbImage& image, const std::vector<PixelPoint>& pixels,
                const Eigen::Vector3d& od_dir, double concentration,
                std::mt19937_64& rng);

std::vector<PixelPoint> RasterDisc(double cx, double cy, double radius, int size);
std::vector<PixelPoint> RasterLine(double cx, double cy, double length,
                                   double thickness, double angle, int size);

/// Row-stochastic attention whose class row follows `token_weight` (length
/// g^2, nonnegative); other rows are uniform.
AttentionTensor MakeAttention(const std::vector<double>& token_weight, int grid_side,
                              int heads, std::mt19937_64& rng);

}  // namespace synseg::testing
