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

#include "synseg/tile_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "synseg/image_io.hpp"

namespace synseg {
namespace {

int ParseInt(std::string_view s, const std::string& context) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw Error(ErrorCode::kFormat, "malformed tile id '" + context + "'");
  }
  return v;
}

// Mirror index into [0, n) without repeating the edge sample.
std::int64_t Reflect(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  const std::int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::int64_t FloorDiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::string TileIdFor(GridIndex index) {
  return std::to_string(index.x) + "_" + std::to_string(index.y);
}

GridIndex ParseTileId(const std::string& tile_id) {
  const auto sep = tile_id.find('_');
  if (sep == std::string::npos) {
    throw Error(ErrorCode::kFormat, "malformed tile id '" + tile_id + "'");
  }
  return {ParseInt(std::string_view(tile_id).substr(0, sep), tile_id),
          ParseInt(std::string_view(tile_id).substr(sep + 1), tile_id)};
}

std::int64_t TileStore::extent_width() const {
  std::int64_t extent = 0;
  const auto cells = grid();
  if (cells.empty()) return 0;
  const int max_x = std::max_element(cells.begin(), cells.end(),
                                     [](auto a, auto b) { return a.x < b.x; })
                        ->x;
  for (const auto& g : cells) {
    if (g.x != max_x) continue;
    if (auto tile = Get(g)) {
      extent = std::max<std::int64_t>(
          extent, static_cast<std::int64_t>(g.x) * tile_size() + tile->width());
    }
  }
  return extent;
}

std::int64_t TileStore::extent_height() const {
  std::int64_t extent = 0;
  const auto cells = grid();
  if (cells.empty()) return 0;
  const int max_y = std::max_element(cells.begin(), cells.end(),
                                     [](auto a, auto b) { return a.y < b.y; })
                        ->y;
  for (const auto& g : cells) {
    if (g.y != max_y) continue;
    if (auto tile = Get(g)) {
      extent = std::max<std::int64_t>(
          extent, static_cast<std::int64_t>(g.y) * tile_size() + tile->height());
    }
  }
  return extent;
}

Tile TileStore::LoadTile(GridIndex index) const {
  auto pixels = Get(index);
  if (!pixels) {
    throw Error(ErrorCode::kMissingTile,
                "tile " + TileIdFor(index) + " of " + wsi_id() + " is absent");
  }
  return Tile{*pixels, static_cast<std::int64_t>(index.x) * tile_size(),
              static_cast<std::int64_t>(index.y) * tile_size(), wsi_id(),
              TileIdFor(index)};
}

InMemoryTileStore::InMemoryTileStore(std::string wsi_id, int tile_size)
    : wsi_id_(std::move(wsi_id)), tile_size_(tile_size) {
  if (tile_size <= 0) throw Error(ErrorCode::kShape, "tile_size must be positive");
}

void InMemoryTileStore::Put(GridIndex index, RgbImage pixels) {
  if (pixels.channels() != 3 || pixels.width() > tile_size_ ||
      pixels.height() > tile_size_) {
    throw Error(ErrorCode::kShape, "tile does not fit the store grid");
  }
  tiles_[index] = std::make_shared<const RgbImage>(std::move(pixels));
}

std::vector<GridIndex> InMemoryTileStore::grid() const {
  std::vector<GridIndex> out;
  out.reserve(tiles_.size());
  for (const auto& [k, _] : tiles_) out.push_back(k);
  return out;
}

std::shared_ptr<const RgbImage> InMemoryTileStore::Get(GridIndex index) const {
  auto it = tiles_.find(index);
  return it == tiles_.end() ? nullptr : it->second;
}

DirectoryTileStore::DirectoryTileStore(const std::filesystem::path& dir,
                                       std::size_t cache_capacity)
    : root_(dir), cache_capacity_(std::max<std::size_t>(cache_capacity, 1)) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir / "tiles")) {
    throw Error(ErrorCode::kIo, dir.string() + " has no tiles/ directory");
  }
  wsi_id_ = dir.filename().string();
  if (wsi_id_.empty()) wsi_id_ = dir.parent_path().filename().string();
  if (fs::exists(dir / "wsi.json")) {
    std::ifstream in(dir / "wsi.json");
    try {
      const auto meta = nlohmann::json::parse(in);
      wsi_id_ = meta.value("wsi_id", wsi_id_);
      tile_size_ = meta.value("tile_size", tile_size_);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, "bad wsi.json: " + std::string(e.what()));
    }
  }
  for (const auto& entry : fs::directory_iterator(dir / "tiles")) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext != ".png" && ext != ".tif" && ext != ".tiff") continue;
    files_[ParseTileId(entry.path().stem().string())] = entry.path();
  }
}

std::vector<GridIndex> DirectoryTileStore::grid() const {
  std::vector<GridIndex> out;
  out.reserve(files_.size());
  for (const auto& [k, _] : files_) out.push_back(k);
  return out;
}

std::shared_ptr<const RgbImage> DirectoryTileStore::Get(GridIndex index) const {
  auto file = files_.find(index);
  if (file == files_.end()) return nullptr;
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(index); it != cache_.end()) {
      lru_.erase(std::find(lru_.begin(), lru_.end(), index));
      lru_.push_back(index);
      return it->second;
    }
  }
  auto image = std::make_shared<const RgbImage>(ReadRgbImage(file->second));
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(index); it != cache_.end()) return it->second;
  cache_[index] = image;
  lru_.push_back(index);
  while (lru_.size() > cache_capacity_) {
    cache_.erase(lru_.front());
    lru_.erase(lru_.begin());
  }
  return image;
}

Patch CropPatch(const TileStore& store, std::int64_t center_x,
                std::int64_t center_y, int size, std::string aggregate_id) {
  const std::int64_t width = store.extent_width();
  const std::int64_t height = store.extent_height();
  if (center_x < 0 || center_y < 0 || center_x >= width || center_y >= height) {
    throw Error(ErrorCode::kBadRequest, "patch center lies outside the slide");
  }
  const std::int64_t tile = store.tile_size();
  const std::int64_t x0 = center_x - size / 2;
  const std::int64_t y0 = center_y - size / 2;

  Patch patch{RgbImage(size, size, 3), center_x, center_y,
              std::move(aggregate_id)};
  std::map<GridIndex, std::shared_ptr<const RgbImage>> tiles;
  for (int py = 0; py < size; ++py) {
    const std::int64_t sy = Reflect(y0 + py, height);
    for (int px = 0; px < size; ++px) {
      const std::int64_t sx = Reflect(x0 + px, width);
      const GridIndex g{static_cast<int>(FloorDiv(sx, tile)),
                        static_cast<int>(FloorDiv(sy, tile))};
      auto it = tiles.find(g);
      if (it == tiles.end()) it = tiles.emplace(g, store.Get(g)).first;
      const auto& src = it->second;
      const int lx = static_cast<int>(sx - g.x * tile);
      const int ly = static_cast<int>(sy - g.y * tile);
      if (!src || lx >= src->width() || ly >= src->height()) {
        throw Error(ErrorCode::kMissingTile,
                    "patch at (" + std::to_string(center_x) + "," +
                        std::to_string(center_y) + ") needs absent tile " +
                        TileIdFor(g));
      }
      std::memcpy(&patch.pixels.at(px, py), &src->at(lx, ly), 3);
    }
  }
  return patch;
}

}  // namespace synseg
