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

/// @file imaging.hpp
/// @brief Pixel containers shared by every pipeline stage.
///
/// All images are dense, row-major, channel-interleaved (HWC). Coordinates
/// are (x, y) with x the column index. Tiles carry their offset in the
/// whole-slide frame so that per-tile results can be mapped back to the slide.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synseg/error.hpp"

namespace synseg {

template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1) {
      throw Error(ErrorCode::kShape, "invalid image shape");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <typename U>
  bool same_shape(const Image<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  T& at(int x, int y, int c = 0) noexcept {
    return data_[index(x, y, c)];
  }
  const T& at(int x, int y, int c = 0) const noexcept {
    return data_[index(x, y, c)];
  }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using RgbImage = Image<std::uint8_t>;

inline constexpr int kPipelineTileSize = 1024;
inline constexpr int kPatchSize = 256;

struct Tile {
  RgbImage pixels;  // 3 channels, RGB order
  std::int64_t origin_x = 0;
  std::int64_t origin_y = 0;
  std::string wsi_id;
  std::string tile_id;

  int width() const noexcept { return pixels.width(); }
  int height() const noexcept { return pixels.height(); }
};

/// Beer-Lambert optical density, one value per RGB channel, all >= 0.
struct OdImage {
  Image<float> values;  // 3 channels
  std::string tile_id;
};

enum class MapKind { kAlkaline, kAttention };
enum class MaskKind { kAlkaline, kAttention, kRefined, kCombined };

std::string_view MaskKindName(MaskKind kind);

/// Per-pixel probabilities in [0, 1].
struct ProbabilityMap {
  Image<float> values;
  MapKind provenance = MapKind::kAttention;
};

struct BinaryMask {
  Image<std::uint8_t> bits;  // 0 or 1
  MaskKind provenance = MaskKind::kAttention;

  std::size_t count() const noexcept;
};

/// Label image with 0 as background and labels 1..label_count, each non-empty.
struct InstanceMask {
  Image<std::uint32_t> labels;
  std::uint32_t label_count = 0;
  /// Connected components merged into each label (index label - 1); empty
  /// means one component per label.
  std::vector<std::uint32_t> component_counts;

  std::uint32_t components_of(std::uint32_t label) const noexcept {
    return component_counts.empty() ? 1u : component_counts[label - 1];
  }
};

struct Patch {
  RgbImage pixels;  // kPatchSize x kPatchSize x 3
  std::int64_t center_x = 0;
  std::int64_t center_y = 0;
  std::string aggregate_id;
};

inline constexpr double kDefaultBackgroundIntensity = 255.0;
inline constexpr double kDefaultOdEpsilon = 1.0;

/// OD_c = -ln(max(I_c, eps) / i0), clamped at 0 for I_c > i0.
OdImage RgbToOd(const Tile& tile, double i0 = kDefaultBackgroundIntensity,
                double eps = kDefaultOdEpsilon);

/// Throws ErrorCode::kShape when a label image is not contiguous 1..K.
void ValidateInstanceMask(const InstanceMask& mask);

}  // namespace synseg
