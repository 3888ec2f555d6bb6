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

#include "synseg/stain.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "../support/synthetic.hpp"
#include "synseg/error.hpp"

namespace synseg {
namespace {

double RelativeError(const OdImage& od, const SnmfResult& r) {
  double num = 0.0;
  double den = 0.0;
  const auto v = od.values.data();
  const auto h = r.concentrations.h.data();
  const auto fg = r.concentrations.foreground.data();
  for (std::size_t i = 0; i < od.values.pixel_count(); ++i) {
    if (!fg[i]) continue;
    const Eigen::Vector3d vi(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
    const Eigen::Vector3d hi(h[3 * i], h[3 * i + 1], h[3 * i + 2]);
    num += (vi - r.basis.w * hi).squaredNorm();
    den += vi.squaredNorm();
  }
  return std::sqrt(num / den);
}

ConcentrationMaps AlkalineOnly(const std::vector<float>& values) {
  ConcentrationMaps c;
  const int n = static_cast<int>(values.size());
  c.h = Image<float>(n, 1, 3);
  c.foreground = Image<std::uint8_t>(n, 1, 1, 1);
  for (int i = 0; i < n; ++i) c.h.at(i, 0, 1) = values[static_cast<std::size_t>(i)];
  return c;
}

TEST(Snmf, RecoversMixtureBasis) {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto mix = testing::MakeStainMixture(seed, 96);
    const auto r = SnmfDecompose(mix.od);
    EXPECT_LT(RelativeError(mix.od, r), 0.05) << "seed " << seed;
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(r.basis.w.col(c).dot(mix.generators.col(c)), 0.99) << "seed " << seed;
      EXPECT_NEAR(r.basis.w.col(c).norm(), 1.0, 1e-9);
    }
  }
}

TEST(Snmf, ObjectiveNeverIncreases) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto mix = testing::MakeStainMixture(seed, 64, 0.3);
    SnmfOptions opt;
    opt.tol = 0.0;
    opt.max_iters = 40;
    const auto r = SnmfDecompose(mix.od, opt);
    ASSERT_GE(r.objective_history.size(), 2u);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      // Equal up to rounding once converged.
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1] * (1.0 + 1e-12))
          << "iteration " << i;
    }
  }
}

TEST(Snmf, RankOneRecoversGenerator) {
  std::mt19937_64 rng(7);
  const Eigen::Vector3d w = Eigen::Vector3d(0.35, 0.82, 0.45).normalized();
  OdImage od{Image<float>(48, 48, 3), "rank1"};
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      const double h = testing::Uniform(rng, 0.3, 1.5);
      for (int c = 0; c < 3; ++c) od.values.at(x, y, c) = static_cast<float>(h * w[c]);
    }
  }
  const auto r = SnmfDecompose(od);
  // Dominant column: the one carrying the most concentration mass.
  std::array<double, 3> mass{};
  const auto h = r.concentrations.h.data();
  for (std::size_t i = 0; i < od.values.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) mass[static_cast<std::size_t>(c)] += h[3 * i + c];
  }
  const auto dominant = static_cast<int>(std::max_element(mass.begin(), mass.end()) - mass.begin());
  EXPECT_GE(r.basis.w.col(dominant).dot(w), 0.999);
}

TEST(Snmf, WhiteTileIsInsufficientTissue) {
  const OdImage od{Image<float>(32, 32, 3), "white"};
  try {
    SnmfDecompose(od);
    FAIL() << "expected InsufficientTissue";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientTissue);
  }
}

TEST(Snmf, SeedDeterminism) {
  const auto mix = testing::MakeStainMixture(4, 64);
  const auto a = SnmfDecompose(mix.od);
  const auto b = SnmfDecompose(mix.od);
  EXPECT_EQ(a.basis.w, b.basis.w);
  EXPECT_EQ(a.concentrations.h, b.concentrations.h);
}

TEST(SolveConcentrations, ExactForKnownBasis) {
  const StainBasis basis = DefaultReferenceBasis();
  OdImage od{Image<float>(3, 1, 3), "t"};
  const Eigen::Vector3d h0(0.5, 0.0, 0.0);
  const Eigen::Vector3d h1(0.0, 1.2, 0.3);
  const Eigen::Vector3d h2(0.2, 0.4, 0.9);
  const std::array<Eigen::Vector3d, 3> hs = {h0, h1, h2};
  for (int x = 0; x < 3; ++x) {
    const Eigen::Vector3d v = basis.w * hs[static_cast<std::size_t>(x)];
    for (int c = 0; c < 3; ++c) od.values.at(x, 0, c) = static_cast<float>(v[c]);
  }
  const auto conc = SolveConcentrations(od, basis, 0.0, 0.0, 2000);
  for (int x = 0; x < 3; ++x) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(conc.h.at(x, 0, c), hs[static_cast<std::size_t>(x)][c], 1e-4);
    }
  }
}

TEST(AssignRoles, UndoesColumnPermutation) {
  const StainBasis refs = DefaultReferenceBasis();
  Eigen::Matrix3d shuffled;
  shuffled.col(0) = refs.w.col(2);
  shuffled.col(1) = refs.w.col(0);
  shuffled.col(2) = refs.w.col(1);
  const auto perm = AssignRoles(shuffled, refs);
  EXPECT_EQ(perm[0], 1);
  EXPECT_EQ(perm[1], 2);
  EXPECT_EQ(perm[2], 0);
}

TEST(AlkalineProbability, ZeroConcentrationGivesZeroMap) {
  const auto p = AlkalineProbability(AlkalineOnly(std::vector<float>(50, 0.0f)));
  for (float v : p.values.data()) EXPECT_EQ(v, 0.0f);
}

TEST(AlkalineProbability, NormalizesByPercentileAndClamps) {
  std::vector<float> values(200, 2.0f);
  values[0] = 1.0f;
  values[199] = 3.0f;
  const auto p = AlkalineProbability(AlkalineOnly(values));
  EXPECT_FLOAT_EQ(p.values.at(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(p.values.at(1, 0), 1.0f);
  EXPECT_FLOAT_EQ(p.values.at(199, 0), 1.0f);
}

TEST(AlkalineProbability, FloorSuppressesFaintStain) {
  const auto p = AlkalineProbability(AlkalineOnly(std::vector<float>(50, 0.04f)));
  for (float v : p.values.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(Percentile({4.0f, 1.0f, 3.0f, 2.0f}, 50.0), 2.5);
  EXPECT_DOUBLE_EQ(Percentile({1.0f, 2.0f, 3.0f, 4.0f, 5.0f}, 100.0), 5.0);
  EXPECT_DOUBLE_EQ(Percentile({1.0f, 2.0f, 3.0f, 4.0f, 5.0f}, 75.0), 4.0);
}

TEST(ThresholdAlkaline, StrictHalf) {
  for (const auto& [value, expect] :
       std::vector<std::pair<float, std::size_t>>{{0.4f, 0}, {0.6f, 16}, {0.5f, 0}}) {
    ProbabilityMap p{Image<float>(4, 4, 1, value), MapKind::kAlkaline};
    EXPECT_EQ(ThresholdAlkaline(p).count(), expect) << value;
  }
}

}  // namespace
}  // namespace synseg
