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

/// @file crf.hpp
/// @brief Binary fully-connected CRF refinement by mean-field inference.
///
/// Pairwise kernel between pixels i and j with positions p and RGB colors I:
///
///   k(i, j) = w_bilateral * exp(-|p_i - p_j|^2 / 2 theta_alpha^2
///                               - |I_i - I_j|^2 / 2 theta_beta^2)
///           + w_spatial   * exp(-|p_i - p_j|^2 / 2 theta_gamma^2)
///
/// with Potts compatibility. Each iteration sets
///   Q_i(l) ~ exp(-U_i(l) - sum_{j != i} k(i, j) Q_j(not l)).
/// Label 0 is foreground, label 1 background; argmax ties go to background.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>

#include "synseg/imaging.hpp"

namespace synseg {

struct CrfParams {
  double w_bilateral = 10.0;
  double w_spatial = 3.0;
  double theta_alpha = 80.0;
  double theta_beta = 13.0;
  double theta_gamma = 3.0;
  int iterations = 5;
  double unary_eps = 1e-3;
};

/// Throws kBadRequest when bandwidths are not positive, weights negative, or
/// iterations < 1. Zero weights are accepted and disable that kernel.
void ValidateCrfParams(const CrfParams& params);

/// Two channels: [0] = -ln P(foreground), [1] = -ln P(background).
struct UnaryField {
  Image<float> u;
};

UnaryField UnaryFromProbability(const ProbabilityMap& p, double eps = 1e-3);

inline constexpr std::size_t kExactModePixelCap = 16384;

/// Called after every iteration with the current Q (2 channels).
using MeanFieldObserver = std::function<void(int iteration, const Image<float>& q)>;

/// O(N^2) reference. Throws kSize above `pixel_cap` pixels.
Image<float> MeanFieldExactQ(const Tile& tile, const UnaryField& unary,
                             const CrfParams& params,
                             const MeanFieldObserver& observer = {},
                             std::size_t pixel_cap = kExactModePixelCap);

/// Production path: bilateral messages on a permutohedral lattice, spatial
/// messages by separable convolution truncated at 4 theta_gamma.
Image<float> MeanFieldFastQ(const Tile& tile, const UnaryField& unary,
                            const CrfParams& params,
                            const MeanFieldObserver& observer = {});

BinaryMask LabelsFromQ(const Image<float>& q);

BinaryMask MeanFieldExact(const Tile& tile, const UnaryField& unary,
                          const CrfParams& params);
BinaryMask MeanFieldFast(const Tile& tile, const UnaryField& unary,
                         const CrfParams& params);

enum class CrfMode { kExact, kFast };

BinaryMask RefineMask(const Tile& tile, const ProbabilityMap& p,
                      const CrfParams& params, CrfMode mode = CrfMode::kFast);

}  // namespace synseg
