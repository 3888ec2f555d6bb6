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

#include "synseg/config.hpp"

#include <gtest/gtest.h>

#include "synseg/error.hpp"

namespace synseg {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIo;
}

TEST(Config, StainBasisRoundTrip) {
  const auto basis = DefaultReferenceBasis();
  const auto back = StainBasisFromJson(StainBasisToJson(basis));
  EXPECT_TRUE(back.w.isApprox(basis.w, 1e-15));
  EXPECT_EQ(CodeOf([] {
              StainBasisFromJson(R"({"roles":["dab","hematoxylin","alkaline_phosphatase"],)"
                                 R"("vectors":[[1,0,0],[0,1,0],[0,0,1]]})");
            }),
            ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([] { StainBasisFromJson("{"); }), ErrorCode::kFormat);
}

TEST(Config, CrfParams) {
  CrfParams p;
  p.w_bilateral = 4.5;
  p.iterations = 9;
  const auto back = CrfParamsFromJson(CrfParamsToJson(p));
  EXPECT_EQ(back.w_bilateral, 4.5);
  EXPECT_EQ(back.iterations, 9);
  EXPECT_EQ(CrfParamsFromJson(R"({"theta_beta":7})").theta_beta, 7.0);
  EXPECT_EQ(CrfParamsFromJson("{}").theta_alpha, CrfParams{}.theta_alpha);
  EXPECT_EQ(CodeOf([] { CrfParamsFromJson(R"({"bogus":1})"); }), ErrorCode::kFormat);
  EXPECT_EQ(CodeOf([] { CrfParamsFromJson(R"({"theta_alpha":0})"); }), ErrorCode::kBadRequest);
}

TEST(Config, Thresholds) {
  const auto t = ThresholdsFromJson(R"({"t_s":50,"t_f":10})");
  EXPECT_EQ(t.t_s, 50.0);
  EXPECT_EQ(t.t_d, 20.0);
  EXPECT_EQ(t.t_f, 10.0);
  const auto back = ThresholdsFromJson(ThresholdsToJson(t));
  EXPECT_EQ(back.t_s, t.t_s);
  EXPECT_EQ(back.t_f, t.t_f);
  EXPECT_EQ(CodeOf([] { ThresholdsFromJson(R"({"t_d":-1})"); }), ErrorCode::kFormat);
}

}  // namespace
}  // namespace synseg
