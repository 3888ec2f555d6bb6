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

#include "synseg/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "../support/synthetic.hpp"
#include "synseg/csv.hpp"
#include "synseg/error.hpp"
#include "synseg/image_io.hpp"
#include "synseg/records.hpp"
#include "synseg/spt.hpp"
#include "synseg/tile_store.hpp"

namespace synseg {
namespace {

namespace fs = std::filesystem;

struct Scene {
  Tile tile;
  AttentionTensor attention;
};

// White tile with magenta discs; attention is high on every cell a disc
// touches.
Scene Discs(int size, const std::vector<std::array<double, 3>>& discs) {
  std::mt19937_64 rng(17);
  Scene s;
  s.tile.pixels = RgbImage(size, size, 3, 250);
  s.tile.wsi_id = "w";
  s.tile.tile_id = "0_0";
  const int g = 32;
  const int cell = size / g;
  std::vector<double> weight(g * g, 0.02);
  const auto magenta = DefaultReferenceBasis().column(StainRole::kAlkaline);
  for (const auto& d : discs) {
    const auto px = testing::RasterDisc(d[0], d[1], d[2], size);
    testing::PaintShape(s.tile.pixels, px, magenta, 1.0, rng);
    for (const auto& p : px) weight[static_cast<std::size_t>((p.y / cell) * g + p.x / cell)] = 1.0;
  }
  s.attention = testing::MakeAttention(weight, g, 2, rng);
  return s;
}

TEST(Pipeline, ThreeSeparatedDiscs) {
  const auto s = Discs(512, {{{100, 100, 20}}, {{300, 120, 20}}, {{200, 380, 20}}});
  PipelineOptions opt;
  const auto r = RunPipeline(s.tile, s.attention, opt);
  ASSERT_EQ(r.records.size(), 3u);
  ASSERT_EQ(r.patches.size(), 3u);
  EXPECT_EQ(r.records[0].aggregate_id, "w_0_0_001");
  EXPECT_NEAR(r.records[0].centroid[0], 100.0, 1.0);
  EXPECT_NEAR(r.records[0].centroid[1], 100.0, 1.0);
  EXPECT_EQ(r.records[0].patch_ref, "patches/w_0_0_001.png");
  EXPECT_EQ(r.patches[0].pixels.width(), kPatchSize);
  EXPECT_NO_THROW(ValidateInstanceMask(r.instances));
}

TEST(Pipeline, BlankTileHasNoRecords) {
  const auto s = Discs(256, {});
  const auto r = RunPipeline(s.tile, s.attention, PipelineOptions{});
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.instances.label_count, 0u);
}

TEST(Pipeline, CloseDiscsAssociate) {
  // Radius 20 discs whose rims are 10 px apart.
  const auto s = Discs(512, {{{200, 250, 20}}, {{250, 250, 20}}});
  PipelineOptions opt;
  opt.keep_intermediates = true;
  const auto r = RunPipeline(s.tile, s.attention, opt);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].component_count, 2u);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  auto s = Discs(256, {{{100, 100, 20}}});
  s.attention.values.pop_back();
  try {
    RunPipeline(s.tile, s.attention, PipelineOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "attention");
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

TEST(Pipeline, SyntheticTilesRecoverGroundTruth) {
  for (std::uint64_t seed : {1u, 3u, 6u}) {
    const auto syn = testing::MakeSyntheticTile(seed);
    const auto r = RunPipeline(syn.tile, syn.attention, PipelineOptions{});
    ASSERT_EQ(r.records.size(), syn.aggregates.size()) << "seed " << seed;
    for (const auto& a : syn.aggregates) {
      double best = 1e9;
      for (const auto& rec : r.records) {
        best = std::min(best, std::hypot(rec.centroid[0] - a.centroid_x,
                                         rec.centroid[1] - a.centroid_y));
      }
      EXPECT_LE(best, 3.0) << "seed " << seed;
    }
  }
}

class SegmentWsiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("synseg_wsi_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_ / "slide" / "tiles");
    fs::create_directories(root_ / "slide" / "attention");
    std::ofstream(root_ / "slide" / "wsi.json") << R"({"wsi_id":"s1","tile_size":256})";
    std::ofstream scores(root_ / "scores.csv");
    scores << "wsi_id,tile_id,score\n";
    testing::SyntheticTileOptions o;
    o.size = 256;
    o.min_aggregates = 1;
    o.max_aggregates = 2;
    o.max_distractors = 0;
    for (int gx = 0; gx < 3; ++gx) {
      const auto syn = testing::MakeSyntheticTile(50 + static_cast<std::uint64_t>(gx), o);
      const std::string id = TileIdFor({gx, 0});
      WriteRgbPng(root_ / "slide" / "tiles" / (id + ".png"), syn.tile.pixels);
      const auto& a = syn.attention;
      Tensor t(DType::kF32, {a.heads, a.tokens(), a.tokens()});
      std::copy(a.values.begin(), a.values.end(), t.f32().begin());
      WriteTensor(root_ / "slide" / "attention" / (id + ".spt"), t);
      scores << "s1," << id << "," << (gx == 2 ? 0.2 : 0.9) << "\n";
      if (gx < 2) expected_ += syn.aggregates.size();
    }
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path root_;
  std::size_t expected_ = 0;
};

TEST_F(SegmentWsiTest, WritesDeterministicOutputs) {
  DirectoryTileStore store(root_ / "slide");
  const auto scores = ReadTileScores(root_ / "scores.csv");
  SegmentOptions opt;
  opt.workers = 1;
  const auto one = SegmentWsi(store, scores, opt, root_ / "out1");
  opt.workers = 3;
  const auto three = SegmentWsi(store, scores, opt, root_ / "out3");
  EXPECT_EQ(one.tiles_processed, 2u);
  EXPECT_EQ(one.aggregates, expected_);
  EXPECT_EQ(three.aggregates, expected_);
  EXPECT_EQ(csv::ReadFile((root_ / "out1" / "aggregates.jsonl").string()),
            csv::ReadFile((root_ / "out3" / "aggregates.jsonl").string()));
  EXPECT_TRUE(fs::exists(root_ / "out1" / "masks" / "0_0.png"));
  EXPECT_FALSE(fs::exists(root_ / "out1" / "masks" / "2_0.png"));
  const auto records = ReadManifest(root_ / "out1" / "aggregates.jsonl");
  ASSERT_EQ(records.size(), expected_);
  for (const auto& r : records) {
    EXPECT_TRUE(fs::exists(root_ / "out1" / r.patch_ref)) << r.patch_ref;
    EXPECT_EQ(r.wsi_id, "s1");
  }
}

}  // namespace
}  // namespace synseg
