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

#include "synseg/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace synseg {

std::string_view MaskKindName(MaskKind kind) {
  switch (kind) {
    case MaskKind::kAlkaline: return "alkaline";
    case MaskKind::kAttention: return "attention";
    case MaskKind::kRefined: return "refined";
    case MaskKind::kCombined: return "combined";
  }
  return "unknown";
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(bits.data().begin(), bits.data().end(),
                    [](std::uint8_t b) { return b != 0; }));
}

OdImage RgbToOd(const Tile& tile, double i0, double eps) {
  if (!(i0 > 0.0) || !(eps > 0.0)) {
    throw Error(ErrorCode::kBadRequest, "rgb_to_od requires i0 > 0 and eps > 0");
  }
  if (tile.pixels.channels() != 3) {
    throw Error(ErrorCode::kShape, "rgb_to_od expects a 3-channel tile");
  }
  // 256-entry lookup: every channel value maps to the same OD.
  float lut[256];
  for (int v = 0; v < 256; ++v) {
    const double od = -std::log(std::max(static_cast<double>(v), eps) / i0);
    lut[v] = static_cast<float>(std::max(od, 0.0));
  }
  OdImage out{Image<float>(tile.width(), tile.height(), 3), tile.tile_id};
  auto src = tile.pixels.data();
  auto dst = out.values.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return out;
}

void ValidateInstanceMask(const InstanceMask& mask) {
  std::vector<std::uint8_t> seen(mask.label_count + 1, 0);
  for (std::uint32_t v : mask.labels.data()) {
    if (v > mask.label_count) {
      throw Error(ErrorCode::kShape, "label exceeds label_count");
    }
    seen[v] = 1;
  }
  for (std::uint32_t k = 1; k <= mask.label_count; ++k) {
    if (!seen[k]) {
      throw Error(ErrorCode::kShape,
                  "instance labels are not contiguous: missing " +
                      std::to_string(k));
    }
  }
}

}  // namespace synseg
