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
#include <random>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "synseg/error.hpp"

namespace synseg {
namespace {

AttentionTensor FromRows(int grid_side, const std::vector<std::vector<float>>& cls_rows) {
  AttentionTensor a;
  a.heads = static_cast<int>(cls_rows.size());
  a.grid_side = grid_side;
  const int t = a.tokens();
  a.values.assign(static_cast<std::size_t>(a.heads) * t * t, 1.0f / static_cast<float>(t));
  for (int h = 0; h < a.heads; ++h) {
    for (int c = 0; c < t; ++c) {
      a.values[static_cast<std::size_t>(h) * t * t + static_cast<std::size_t>(c)] =
          cls_rows[static_cast<std::size_t>(h)][static_cast<std::size_t>(c)];
    }
  }
  return a;
}

TEST(ClassAttention, SingleHeadDropsClassColumn) {
  const auto a = FromRows(2, {{0.1f, 0.2f, 0.3f, 0.4f, 0.0f}});
  const auto c = ClassAttention(a);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_FLOAT_EQ(static_cast<float>(c[0]), 0.2f);
  EXPECT_FLOAT_EQ(static_cast<float>(c[1]), 0.3f);
  EXPECT_FLOAT_EQ(static_cast<float>(c[2]), 0.4f);
  EXPECT_FLOAT_EQ(static_cast<float>(c[3]), 0.0f);
}

TEST(ClassAttention, HandAveragedHeads) {
  // N = 4 (g = 2): class rows (. | 0.2 0.3 0.5 0.0) and (. | 0.4 0.4 0.2 0.0).
  const auto a = FromRows(2, {{0.0f, 0.2f, 0.3f, 0.5f, 0.0f}, {0.0f, 0.4f, 0.4f, 0.2f, 0.0f}});
  const auto c = ClassAttention(a);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_NEAR(c[0], 0.3, 1e-7);
  EXPECT_NEAR(c[1], 0.35, 1e-7);
  EXPECT_NEAR(c[2], 0.35, 1e-7);
  EXPECT_NEAR(c[3], 0.0, 1e-7);
}

TEST(ClassAttention, UniformIsConstant) {
  const auto a = FromRows(3, {std::vector<float>(10, 0.1f)});
  for (double v : ClassAttention(a)) EXPECT_FLOAT_EQ(static_cast<float>(v), 0.1f);
}

TEST(ClassAttention, MatchesOracleAndIgnoresHeadOrder) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    auto a = testing::RandomAttention(rng, 1 + trial % 4, 2 + trial % 5, trial % 3);
    const auto got = ClassAttention(a);
    EXPECT_EQ(got, testing::ClassAttentionOracle(a));
    // Reverse the heads.
    const auto block = static_cast<std::size_t>(a.tokens()) * a.tokens();
    AttentionTensor b = a;
    for (int h = 0; h < a.heads; ++h) {
      std::copy_n(a.values.begin() + static_cast<std::ptrdiff_t>(h * block), block,
                  b.values.begin() + static_cast<std::ptrdiff_t>((a.heads - 1 - h) * block));
    }
    const auto permuted = ClassAttention(b);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(permuted[i], got[i], 1e-12);
  }
}

TEST(AttentionFromTensor, ShapeMismatch) {
  const Tensor t = Tensor::FromF32({1, 5, 5}, std::vector<float>(25, 0.2f));
  EXPECT_NO_THROW(AttentionFromTensor(t, 2));
  try {
    AttentionFromTensor(t, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

TEST(AttentionToMap, ConstantIsZero) {
  const std::vector<double> v(16, 0.25);
  const auto p = AttentionToMap(v, 4, 8, 8);
  for (float x : p.values.data()) EXPECT_EQ(x, 0.0f);
}

TEST(AttentionToMap, NoResizeKeepsBinary) {
  const std::vector<double> v = {0, 0, 0, 1};
  const auto p = AttentionToMap(v, 2, 2, 2);
  EXPECT_EQ(std::vector<float>(p.values.data().begin(), p.values.data().end()),
            std::vector<float>({0, 0, 0, 1}));
}

TEST(AttentionToMap, BilinearMatchesDirectFormula) {
  const std::vector<double> v = {0, 0, 0, 1};
  const auto p = AttentionToMap(v, 2, 4, 4);
  // Pixel centre i maps to source (i + 0.5) / 2 - 0.5, clamped to [0, 1];
  // only the bottom-right cell is 1, so the value is fx * fy.
  const double f[4] = {0.0, 0.25, 0.75, 1.0};
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) EXPECT_NEAR(p.values.at(x, y), f[x] * f[y], 1e-7);
  }
  EXPECT_EQ(p.values.at(3, 3), 1.0f);
}

TEST(ThresholdAttention, Examples) {
  ProbabilityMap zero{Image<float>(4, 4, 1), MapKind::kAttention};
  EXPECT_EQ(ThresholdAttention(zero).count(), 0u);
  ProbabilityMap one = zero;
  one.values.at(2, 1) = 0.15f;
  const auto m = ThresholdAttention(one, 0.1);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_EQ(m.bits.at(2, 1), 1);
  EXPECT_EQ(kDefaultTau, 0.1);
  // Inclusive at tau.
  one.values.at(0, 0) = 0.1f;
  EXPECT_EQ(ThresholdAttention(one, 0.1f).count(), 2u);
}

TEST(TileScores, SelectPositive) {
  const auto scores = ParseTileScores("wsi_id,tile_id,score\ns1,a,0.9\ns1,b,0.1\n");
  const auto sel = SelectPositiveTiles(scores, 0.5);
  ASSERT_EQ(sel.size(), 1u);
  EXPECT_EQ(sel[0].tile_id, "a");
  EXPECT_TRUE(SelectPositiveTiles({}, 0.5).empty());
  const auto eq = ParseTileScores("wsi_id,tile_id,score\ns,1_0,0.5\ns,0_0,0.5\n");
  const auto all = SelectPositiveTiles(eq, 0.5);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].tile_id, "0_0");
}

TEST(TileScores, RejectsBadRows) {
  EXPECT_THROW(ParseTileScores("wsi_id,tile_id,score\ns,a,1.5\n"), Error);
  EXPECT_THROW(ParseTileScores("wsi_id,tile_id,score\ns,a,0.5\ns,a,0.6\n"), Error);
  EXPECT_THROW(ParseTileScores("tile,score\na,0.5\n"), Error);
}

}  // namespace
}  // namespace synseg
