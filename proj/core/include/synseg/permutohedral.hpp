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

/// @file permutohedral.hpp
/// @brief Gaussian filtering in a d-dimensional feature space on the
/// permutohedral lattice (Adams, Baek and Davis, 2010).
///
/// Points are splatted onto the vertices of their enclosing simplex, blurred
/// with a [1 2 1] kernel along each of the d+1 lattice directions, then
/// sliced back with the same barycentric weights. The result approximates
///
///     out_i = gain * sum_j exp(-||f_i - f_j||^2 / 2) * in_j
///
/// for features already divided by their bandwidths. The gain is a lattice
/// constant; callers that need absolute kernel sums calibrate it.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace synseg {

class PermutohedralLattice {
 public:
  /// `features` is row-major, point_count x dim.
  PermutohedralLattice(std::span<const float> features, int dim);

  int dim() const noexcept { return dim_; }
  std::size_t point_count() const noexcept { return points_; }
  std::size_t vertex_count() const noexcept { return vertices_; }

  /// `in` and `out` are point_count x channels, row-major. `out` may not
  /// alias `in`.
  void Filter(std::span<const float> in, std::span<float> out, int channels) const;

 private:
  int dim_;
  std::size_t points_;
  std::size_t vertices_ = 0;
  // Per point, dim+1 vertex indices and barycentric weights.
  std::vector<std::int32_t> offsets_;
  std::vector<float> weights_;
  // Per direction and vertex, the two neighbour indices (-1 when absent).
  std::vector<std::int32_t> neighbors_;
};

}  // namespace synseg
