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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "synseg/imaging.hpp"

namespace synseg {

struct GridIndex {
  int x = 0;
  int y = 0;
  auto operator<=>(const GridIndex&) const = default;
};

/// Canonical tile id for a grid cell, "<gx>_<gy>".
std::string TileIdFor(GridIndex index);
/// Inverse of TileIdFor; throws kFormat on malformed ids.
GridIndex ParseTileId(const std::string& tile_id);

/// A regular grid of RGB tiles covering one whole-slide image. Tiles are
/// square with side `tile_size()` except possibly along the right and bottom
/// edges. Safe for concurrent readers.
class TileStore {
 public:
  virtual ~TileStore() = default;

  virtual const std::string& wsi_id() const = 0;
  virtual int tile_size() const = 0;
  virtual std::vector<GridIndex> grid() const = 0;
  /// nullptr when the tile is absent.
  virtual std::shared_ptr<const RgbImage> Get(GridIndex index) const = 0;

  /// Slide extent in pixels, derived from the present tiles.
  std::int64_t extent_width() const;
  std::int64_t extent_height() const;

  Tile LoadTile(GridIndex index) const;
};

class InMemoryTileStore final : public TileStore {
 public:
  InMemoryTileStore(std::string wsi_id, int tile_size);

  void Put(GridIndex index, RgbImage pixels);

  const std::string& wsi_id() const override { return wsi_id_; }
  int tile_size() const override { return tile_size_; }
  std::vector<GridIndex> grid() const override;
  std::shared_ptr<const RgbImage> Get(GridIndex index) const override;

 private:
  std::string wsi_id_;
  int tile_size_;
  std::map<GridIndex, std::shared_ptr<const RgbImage>> tiles_;
};

/// Reads `<dir>/tiles/<gx>_<gy>.{png,tif,tiff}` on demand with a bounded
/// cache. An optional `<dir>/wsi.json` supplies {"wsi_id", "tile_size"};
/// otherwise the directory name and 1024 are used.
class DirectoryTileStore final : public TileStore {
 public:
  explicit DirectoryTileStore(const std::filesystem::path& dir,
                              std::size_t cache_capacity = 16);

  const std::string& wsi_id() const override { return wsi_id_; }
  int tile_size() const override { return tile_size_; }
  std::vector<GridIndex> grid() const override;
  std::shared_ptr<const RgbImage> Get(GridIndex index) const override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::string wsi_id_;
  int tile_size_ = kPipelineTileSize;
  std::map<GridIndex, std::filesystem::path> files_;
  std::size_t cache_capacity_;

  mutable std::mutex mu_;
  mutable std::map<GridIndex, std::shared_ptr<const RgbImage>> cache_;
  mutable std::vector<GridIndex> lru_;
};

/// Cuts a size x size window centred on (center_x, center_y) in slide
/// coordinates: columns [cx - size/2, cx + size/2). Samples outside the slide
/// extent are mirrored about the border (edge pixel not repeated). Throws
/// kMissingTile when a required tile inside the extent is absent.
Patch CropPatch(const TileStore& store, std::int64_t center_x,
                std::int64_t center_y, int size = kPatchSize,
                std::string aggregate_id = {});

}  // namespace synseg
