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

#include "synseg/retrieval.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "synseg/error.hpp"
#include "synseg/spt.hpp"

namespace synseg {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> Ids(std::size_t n, const std::string& prefix = "a") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

std::vector<std::vector<double>> Rows(const EmbeddingIndex& index) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto r = index.row(i);
    rows.emplace_back(r.begin(), r.end());
  }
  return rows;
}

TEST(Index, RowsAreUnitNorm) {
  const std::vector<float> v = {3, 4, 0, 0, 0, 2};
  EmbeddingIndex index(v, 3, {"x", "y"});
  EXPECT_NEAR(index.row(0)[0], 0.6, 1e-7);
  EXPECT_NEAR(index.row(0)[1], 0.8, 1e-7);
  EXPECT_NEAR(index.row(1)[2], 1.0, 1e-7);
  EXPECT_EQ(index.find("y"), 1u);
  EXPECT_FALSE(index.find("z").has_value());
}

TEST(Index, ZeroVectorNamesId) {
  const std::vector<float> v = {1, 0, 0, 0, 0, 0, 0, 1, 0};
  try {
    EmbeddingIndex index(v, 3, {"ok1", "bad", "ok2"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(Index, ShapeAndIdErrors) {
  const std::vector<float> v = {1, 0, 0, 1};
  EXPECT_EQ(CodeOf([&] { EmbeddingIndex(v, 2, {"a"}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(CodeOf([&] { EmbeddingIndex(v, 2, {"a", "a"}); }), ErrorCode::kFormat);
  EmbeddingIndex index(v, 2, {"a", "b"});
  const std::vector<float> q = {1, 0, 0};
  EXPECT_EQ(CodeOf([&] { index.Knn(q); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(CodeOf([&] { index.Knn(std::vector<float>{1, 0}, 0); }), ErrorCode::kBadRequest);
  EXPECT_EQ(CodeOf([&] { index.KnnById("missing"); }), ErrorCode::kNotFound);
}

TEST(Index, EmptyIndexReturnsNothing) {
  EmbeddingIndex index(std::span<const float>{}, 4, {});
  EXPECT_EQ(index.size(), 0u);
  EXPECT_TRUE(index.Knn(std::vector<float>{1, 0, 0, 0}).empty());
  EXPECT_TRUE(index.FlagDuplicates().empty());
}

TEST(Knn, SelfIsRankOne) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> n;
  std::vector<float> v(20 * 6);
  for (auto& x : v) x = n(rng);
  EmbeddingIndex index(v, 6, Ids(20));
  const auto r = index.KnnById("a7", 5);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_EQ(r[0].id, "a7");
  EXPECT_NEAR(r[0].score, 1.0, 1e-6);
  EXPECT_EQ(r[0].rank, 1);
}

TEST(Knn, LargeKReturnsAll) {
  const std::vector<float> v = {1, 0, 0, 1, 1, 1};
  EmbeddingIndex index(v, 2, {"c", "b", "a"});
  const auto r = index.Knn(std::vector<float>{1, 0}, 10);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].id, "c");
  EXPECT_EQ(r[1].id, "a");
  EXPECT_EQ(r[2].id, "b");
  EXPECT_EQ(r[2].rank, 3);
}

TEST(Knn, DefaultsToTwoHundredFifty) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n;
  std::vector<float> v(300 * 4);
  for (auto& x : v) x = n(rng);
  EmbeddingIndex index(v, 4, Ids(300));
  EXPECT_EQ(index.Knn(std::span<const float>(v.data(), 4)).size(), 250u);
}

TEST(Knn, TiesBreakByAscendingId) {
  const std::vector<float> v = {1, 0, 1, 0, 0, 1, 1, 0};
  EmbeddingIndex index(v, 2, {"d", "b", "a", "c"});
  const auto r = index.Knn(std::vector<float>{2, 0}, 4);
  EXPECT_EQ(r[0].id, "b");
  EXPECT_EQ(r[1].id, "c");
  EXPECT_EQ(r[2].id, "d");
  EXPECT_EQ(r[3].id, "a");
  EXPECT_EQ(index.Knn(std::vector<float>{2, 0}, 4), r);
}

void ExpectSameNeighbors(const std::vector<Neighbor>& got, const std::vector<Neighbor>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].id, want[i].id) << "rank " << i + 1;
    EXPECT_EQ(got[i].rank, want[i].rank);
    EXPECT_NEAR(got[i].score, want[i].score, 1e-6);
  }
}

TEST(Knn, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> n;
  for (Metric metric : {Metric::kCosine, Metric::kEuclidean}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t m = 50;
      std::vector<float> v(m * 8);
      for (auto& x : v) x = n(rng);
      // Exact duplicates force tied scores.
      std::copy(v.begin(), v.begin() + 8, v.begin() + 8 * 10);
      std::copy(v.begin(), v.begin() + 8, v.begin() + 8 * 30);
      auto ids = Ids(m, "p");
      std::shuffle(ids.begin(), ids.end(), rng);
      EmbeddingIndex index(v, 8, ids, metric);
      std::vector<double> q(8);
      for (auto& x : q) x = n(rng);
      if (metric == Metric::kEuclidean) {
        double s = 0;
        for (double x : q) s += x * x;
        for (auto& x : q) x /= std::sqrt(s);
      }
      const std::vector<float> qf(q.begin(), q.end());
      const auto want = testing::KnnOracle(Rows(index), index.ids(),
                                           {qf.begin(), qf.end()}, 20, metric);
      ExpectSameNeighbors(index.Knn(qf, 20), want);
      const auto row0 = index.row(0);
      const std::vector<double> self(row0.begin(), row0.end());
      ExpectSameNeighbors(index.KnnById(index.ids()[0], 5),
                          testing::KnnOracle(Rows(index), index.ids(), self, 5, metric));
    }
  }
}

TEST(Duplicates, IdenticalAndOrthogonal) {
  const std::vector<float> same = {1, 2, 2, 4};
  EmbeddingIndex a(same, 2, {"z", "y"});
  const auto pairs = a.FlagDuplicates();
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].first, "y");
  EXPECT_EQ(pairs[0].second, "z");
  EXPECT_NEAR(pairs[0].similarity, 1.0, 1e-6);

  const std::vector<float> ortho = {1, 0, 0, 1};
  EXPECT_TRUE(EmbeddingIndex(ortho, 2, {"a", "b"}).FlagDuplicates().empty());
}

TEST(Duplicates, MatchAllPairs) {
  std::mt19937_64 rng(19);
  std::normal_distribution<float> n;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 40;
    std::vector<float> v(m * 3);
    for (auto& x : v) x = n(rng);
    EmbeddingIndex index(v, 3, Ids(m));
    const double cutoff = 0.95;
    std::vector<DuplicatePair> want;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        double s = 0;
        for (int d = 0; d < 3; ++d) s += double(index.row(i)[d]) * index.row(j)[d];
        if (s < cutoff) continue;
        auto x = index.ids()[i], y = index.ids()[j];
        if (y < x) std::swap(x, y);
        want.push_back({x, y, s});
      }
    }
    std::sort(want.begin(), want.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first, a.second) < std::tie(b.first, b.second);
    });
    EXPECT_EQ(index.FlagDuplicates(cutoff), want);
  }
}

class IndexFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("synseg_idx_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(IndexFiles, SaveLoadRoundTrip) {
  const std::vector<float> v = {1, 2, 3, -1, 0, 4};
  EmbeddingIndex index(v, 3, {"q", "r"}, Metric::kEuclidean);
  SaveIndex(dir_ / "idx.spt", index);
  EXPECT_TRUE(fs::exists(dir_ / "idx.spt.json"));
  const auto back = LoadIndex(dir_ / "idx.spt");
  EXPECT_EQ(back.ids(), index.ids());
  EXPECT_EQ(back.metric(), Metric::kEuclidean);
  ASSERT_EQ(back.vectors().size(), index.vectors().size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_NEAR(back.vectors()[i], index.vectors()[i], 1e-7);
  }
}

TEST_F(IndexFiles, BuildFromEmbeddings) {
  const std::vector<float> v = {1, 0, 0, 1, 1, 1};
  WriteTensor(dir_ / "emb.spt", Tensor::FromF32({3, 2}, v));
  std::ofstream(dir_ / "ids.txt") << "a\nb\nc\n";
  const auto index = BuildIndex(dir_ / "emb.spt", dir_ / "ids.txt");
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.KnnById("c", 1)[0].id, "c");

  std::ofstream(dir_ / "short.txt") << "a\nb\n";
  EXPECT_EQ(CodeOf([&] { BuildIndex(dir_ / "emb.spt", dir_ / "short.txt"); }),
            ErrorCode::kDimensionMismatch);
  WriteTensor(dir_ / "zero.spt", Tensor::FromF32({3, 2}, std::vector<float>{1, 0, 0, 0, 1, 1}));
  EXPECT_EQ(CodeOf([&] { BuildIndex(dir_ / "zero.spt", dir_ / "ids.txt"); }),
            ErrorCode::kZeroVector);
}

}  // namespace
}  // namespace synseg
