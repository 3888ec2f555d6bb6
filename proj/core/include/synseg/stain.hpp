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

/// @file stain.hpp
/// @brief Three-stain decomposition of optical-density tiles.
///
/// An OD image V (3 x n, one column per pixel) is factorized as V ~= W H with
/// W the 3 x 3 stain basis and H the per-pixel concentrations, minimizing
///
///     1/2 ||V - W H||_F^2 + lambda * sum_j ||H_j||_1,   W >= 0, H >= 0,
///
/// with unit-norm columns of W. The solver alternates exact coordinate
/// descent on H with projected gradient on W, so the objective never
/// increases from one outer iteration to the next.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "synseg/imaging.hpp"

namespace synseg {

enum class StainRole : int { kHematoxylin = 0, kAlkaline = 1, kDab = 2 };
inline constexpr std::array<std::string_view, 3> kStainRoleNames = {
    "hematoxylin", "alkaline_phosphatase", "dab"};

/// Columns are OD-space unit vectors in StainRole order.
struct StainBasis {
  Eigen::Matrix3d w = Eigen::Matrix3d::Zero();

  Eigen::Vector3d column(StainRole role) const {
    return w.col(static_cast<int>(role));
  }
};

/// Reference directions used for initialization and role assignment.
StainBasis DefaultReferenceBasis();

struct ConcentrationMaps {
  Image<float> h;                     // 3 channels in StainRole order
  Image<std::uint8_t> foreground;     // pixels that entered the fit
};

struct SnmfOptions {
  /// Sparsity weight while learning the basis.
  double lambda = 0.1;
  /// Sparsity weight for the returned concentration maps, solved once the
  /// basis is fixed. Smaller than `lambda` to limit L1 shrinkage bias.
  double concentration_lambda = 0.01;
  int max_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 42;
  /// OD L1 norm above which a pixel counts as tissue.
  double background_threshold = 0.15;
  std::size_t min_foreground = 100;
  /// The basis is learned on at most this many foreground pixels (seeded
  /// subsample); concentrations are then solved for every pixel.
  std::size_t max_fit_pixels = 65536;
  StainBasis references = DefaultReferenceBasis();
  double init_perturbation = 0.05;
  int w_steps_per_iter = 10;
  int max_cd_sweeps = 100;
};

struct SnmfResult {
  StainBasis basis;
  ConcentrationMaps concentrations;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // lambda objective on fit pixels
  std::size_t foreground_pixels = 0;
  std::size_t fit_pixels = 0;
};

/// Throws kInsufficientTissue when fewer than `min_foreground` pixels exceed
/// the background threshold. Non-convergence is reported in the result.
SnmfResult SnmfDecompose(const OdImage& od, const SnmfOptions& options = {});

/// Nonnegative L1-penalized concentrations for a fixed basis.
ConcentrationMaps SolveConcentrations(const OdImage& od, const StainBasis& basis,
                                      double lambda,
                                      double background_threshold = 0.15,
                                      int max_cd_sweeps = 100);

/// Objective value of (W, H) over the foreground columns of V.
double SnmfObjective(const OdImage& od, const StainBasis& basis,
                     const ConcentrationMaps& conc, double lambda);

/// Column permutation of `w` maximizing the summed cosine similarity with the
/// reference columns; perm[role] is the source column for that role.
std::array<int, 3> AssignRoles(const Eigen::Matrix3d& w,
                               const StainBasis& references);

inline constexpr double kDefaultAlkalinePercentile = 99.0;
inline constexpr double kDefaultConcentrationFloor = 0.05;

/// clamp(H_alk / max(percentile_q over foreground, c_floor), 0, 1); all zero
/// when the percentile itself falls below c_floor or there is no foreground.
ProbabilityMap AlkalineProbability(
    const ConcentrationMaps& conc, double percentile = kDefaultAlkalinePercentile,
    double c_floor = kDefaultConcentrationFloor);

/// Strict p > 0.5.
BinaryMask ThresholdAlkaline(const ProbabilityMap& p);

/// Linear-interpolated percentile (q in [0, 100]) of a non-empty sample.
double Percentile(std::vector<float> values, double q);

}  // namespace synseg
