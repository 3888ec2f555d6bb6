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

#include "synseg/crf.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "synseg/permutohedral.hpp"

namespace synseg {
namespace {

constexpr int kLabels = 2;

void CheckShapes(const Tile& tile, const UnaryField& unary) {
  if (tile.pixels.channels() != 3 || unary.u.channels() != kLabels ||
      !unary.u.same_shape(tile.pixels)) {
    throw Error(ErrorCode::kShape, "tile and unary field shapes differ");
  }
}

// Q = softmax(-(U + pairwise)), written into q. `pairwise` may be empty.
void UpdateQ(const Image<float>& unary, const std::vector<double>& pairwise,
             Image<float>& q) {
  const auto u = unary.data();
  auto out = q.data();
  const std::size_t n = unary.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    double e0 = -static_cast<double>(u[2 * i]);
    double e1 = -static_cast<double>(u[2 * i + 1]);
    if (!pairwise.empty()) {
      e0 -= pairwise[2 * i];
      e1 -= pairwise[2 * i + 1];
    }
    const double m = std::max(e0, e1);
    const double a = std::exp(e0 - m);
    const double b = std::exp(e1 - m);
    out[2 * i] = static_cast<float>(a / (a + b));
    out[2 * i + 1] = static_cast<float>(b / (a + b));
  }
}

bool HasPairwise(const CrfParams& p) {
  return p.w_bilateral > 0.0 || p.w_spatial > 0.0;
}

// Potts: the energy of label l grows with the message carried by the other
// label.
void PottsFromMessages(const std::vector<double>& msg, std::vector<double>& pairwise) {
  for (std::size_t i = 0; i < msg.size(); i += 2) {
    pairwise[i] = msg[i + 1];
    pairwise[i + 1] = msg[i];
  }
}

// 1-D Gaussian taps exp(-t^2 / 2 theta^2) for |t| <= radius.
std::vector<float> GaussianTaps(double theta, int radius) {
  std::vector<float> taps(static_cast<std::size_t>(2 * radius + 1));
  for (int t = -radius; t <= radius; ++t) {
    taps[static_cast<std::size_t>(t + radius)] =
        static_cast<float>(std::exp(-0.5 * t * t / (theta * theta)));
  }
  return taps;
}

// Separable 2-D Gaussian over a 2-channel image, zero outside the image.
void SpatialFilter(const Image<float>& q, const std::vector<float>& taps,
                   std::vector<float>& tmp, std::vector<float>& out) {
  const int w = q.width();
  const int h = q.height();
  const int r = static_cast<int>(taps.size() / 2);
  const auto src = q.data();
  tmp.assign(src.size(), 0.0f);
  out.assign(src.size(), 0.0f);
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      float s0 = 0.0f;
      float s1 = 0.0f;
      const int lo = std::max(0, x - r);
      const int hi = std::min(w - 1, x + r);
      for (int xx = lo; xx <= hi; ++xx) {
        const float k = taps[static_cast<std::size_t>(xx - x + r)];
        s0 += k * src[2 * (row + xx)];
        s1 += k * src[2 * (row + xx) + 1];
      }
      tmp[2 * (row + x)] = s0;
      tmp[2 * (row + x) + 1] = s1;
    }
  }
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(0, y - r);
    const int hi = std::min(h - 1, y + r);
    for (int yy = lo; yy <= hi; ++yy) {
      const float k = taps[static_cast<std::size_t>(yy - y + r)];
      const std::size_t dst_row = static_cast<std::size_t>(y) * w;
      const std::size_t src_row = static_cast<std::size_t>(yy) * w;
      for (int x = 0; x < w; ++x) {
        out[2 * (dst_row + x)] += k * tmp[2 * (src_row + x)];
        out[2 * (dst_row + x) + 1] += k * tmp[2 * (src_row + x) + 1];
      }
    }
  }
}

}  // namespace

void ValidateCrfParams(const CrfParams& p) {
  if (!(p.w_bilateral >= 0.0) || !(p.w_spatial >= 0.0)) {
    throw Error(ErrorCode::kBadRequest, "CRF kernel weights must be >= 0");
  }
  if (!(p.theta_alpha > 0.0) || !(p.theta_beta > 0.0) || !(p.theta_gamma > 0.0)) {
    throw Error(ErrorCode::kBadRequest, "CRF bandwidths must be > 0");
  }
  if (p.iterations < 1) throw Error(ErrorCode::kBadRequest, "CRF iterations must be >= 1");
  if (!(p.unary_eps > 0.0 && p.unary_eps < 0.5)) {
    throw Error(ErrorCode::kBadRequest, "unary eps must lie in (0, 0.5)");
  }
}

UnaryField UnaryFromProbability(const ProbabilityMap& p, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw Error(ErrorCode::kBadRequest, "unary eps must lie in (0, 0.5)");
  }
  UnaryField out{Image<float>(p.values.width(), p.values.height(), kLabels)};
  const auto src = p.values.data();
  auto dst = out.u.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = src[i];
    dst[2 * i] = static_cast<float>(-std::log(std::clamp(v, eps, 1.0 - eps)));
    dst[2 * i + 1] = static_cast<float>(-std::log(std::clamp(1.0 - v, eps, 1.0 - eps)));
  }
  return out;
}

Image<float> MeanFieldExactQ(const Tile& tile, const UnaryField& unary,
                             const CrfParams& params,
                             const MeanFieldObserver& observer,
                             std::size_t pixel_cap) {
  ValidateCrfParams(params);
  CheckShapes(tile, unary);
  const std::size_t n = tile.pixels.pixel_count();
  if (n > pixel_cap) {
    throw Error(ErrorCode::kSize, "exact mean-field is limited to " +
                                      std::to_string(pixel_cap) + " pixels");
  }
  const int w = tile.width();
  std::vector<double> feat(n * 5);
  const auto px = tile.pixels.data();
  for (std::size_t i = 0; i < n; ++i) {
    feat[5 * i] = static_cast<double>(i % static_cast<std::size_t>(w));
    feat[5 * i + 1] = static_cast<double>(i / static_cast<std::size_t>(w));
    for (int c = 0; c < 3; ++c) feat[5 * i + 2 + c] = px[3 * i + c];
  }
  const double ia = 1.0 / (2.0 * params.theta_alpha * params.theta_alpha);
  const double ib = 1.0 / (2.0 * params.theta_beta * params.theta_beta);
  const double ig = 1.0 / (2.0 * params.theta_gamma * params.theta_gamma);

  Image<float> q(tile.width(), tile.height(), kLabels);
  UpdateQ(unary.u, {}, q);
  std::vector<double> msg(2 * n);
  std::vector<double> pairwise(2 * n);
  const bool pair = HasPairwise(params);
  for (int it = 0; it < params.iterations; ++it) {
    if (pair) {
      const auto qd = q.data();
      for (std::size_t i = 0; i < n; ++i) {
        const double* fi = &feat[5 * i];
        double m0 = 0.0;
        double m1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double* fj = &feat[5 * j];
          const double dp = (fi[0] - fj[0]) * (fi[0] - fj[0]) +
                            (fi[1] - fj[1]) * (fi[1] - fj[1]);
          const double dc = (fi[2] - fj[2]) * (fi[2] - fj[2]) +
                            (fi[3] - fj[3]) * (fi[3] - fj[3]) +
                            (fi[4] - fj[4]) * (fi[4] - fj[4]);
          const double k = params.w_bilateral * std::exp(-dp * ia - dc * ib) +
                           params.w_spatial * std::exp(-dp * ig);
          m0 += k * qd[2 * j];
          m1 += k * qd[2 * j + 1];
        }
        msg[2 * i] = m0;
        msg[2 * i + 1] = m1;
      }
      PottsFromMessages(msg, pairwise);
      UpdateQ(unary.u, pairwise, q);
    } else {
      UpdateQ(unary.u, {}, q);
    }
    if (observer) observer(it + 1, q);
  }
  return q;
}

Image<float> MeanFieldFastQ(const Tile& tile, const UnaryField& unary,
                            const CrfParams& params,
                            const MeanFieldObserver& observer) {
  ValidateCrfParams(params);
  CheckShapes(tile, unary);
  const std::size_t n = tile.pixels.pixel_count();
  const int w = tile.width();

  Image<float> q(tile.width(), tile.height(), kLabels);
  UpdateQ(unary.u, {}, q);
  if (!HasPairwise(params) || n == 0) {
    for (int it = 0; it < params.iterations; ++it) {
      UpdateQ(unary.u, {}, q);
      if (observer) observer(it + 1, q);
    }
    return q;
  }

  // Bilateral term: lattice over (x, y, r, g, b) / bandwidths. The lattice
  // reproduces the Gaussian up to a gain, estimated once against exact
  // kernel sums on a fixed subsample of pixels.
  std::unique_ptr<PermutohedralLattice> lattice;
  double gain = 1.0;
  const auto px = tile.pixels.data();
  if (params.w_bilateral > 0.0) {
    std::vector<float> feat(n * 5);
    for (std::size_t i = 0; i < n; ++i) {
      feat[5 * i] = static_cast<float>(static_cast<double>(i % static_cast<std::size_t>(w)) / params.theta_alpha);
      feat[5 * i + 1] = static_cast<float>(static_cast<double>(i / static_cast<std::size_t>(w)) / params.theta_alpha);
      for (int c = 0; c < 3; ++c) {
        feat[5 * i + 2 + c] = static_cast<float>(px[3 * i + c] / params.theta_beta);
      }
    }
    lattice = std::make_unique<PermutohedralLattice>(feat, 5);

    std::vector<float> ones(n, 1.0f);
    std::vector<float> response(n);
    lattice->Filter(ones, response, 1);
    const std::size_t samples = std::min<std::size_t>(n, 32);
    double approx = 0.0;
    double exact = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = s * n / samples;
      approx += response[i];
      const float* fi = &feat[5 * i];
      for (std::size_t j = 0; j < n; ++j) {
        const float* fj = &feat[5 * j];
        float d2 = 0.0f;
        for (int c = 0; c < 5; ++c) {
          const float d = fi[c] - fj[c];
          d2 += d * d;
        }
        // Terms below exp(-30) cannot move the sum, which is at least 1.
        if (d2 < 60.0f) exact += std::exp(-0.5 * static_cast<double>(d2));
      }
    }
    gain = approx / exact;
  }

  const int radius = static_cast<int>(std::ceil(4.0 * params.theta_gamma));
  const auto taps = GaussianTaps(params.theta_gamma, radius);

  std::vector<float> bil(2 * n);
  std::vector<float> spatial;
  std::vector<float> tmp;
  std::vector<double> msg(2 * n);
  std::vector<double> pairwise(2 * n);
  for (int it = 0; it < params.iterations; ++it) {
    const auto qd = q.data();
    std::fill(msg.begin(), msg.end(), 0.0);
    if (lattice) {
      lattice->Filter(qd, bil, kLabels);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        // Remove the self term (kernel value 1 at zero distance).
        const double m = static_cast<double>(bil[i]) / gain - qd[i];
        msg[i] += params.w_bilateral * std::max(m, 0.0);
      }
    }
    if (params.w_spatial > 0.0) {
      SpatialFilter(q, taps, tmp, spatial);
      for (std::size_t i = 0; i < 2 * n; ++i) {
        const double m = static_cast<double>(spatial[i]) - qd[i];
        msg[i] += params.w_spatial * std::max(m, 0.0);
      }
    }
    PottsFromMessages(msg, pairwise);
    UpdateQ(unary.u, pairwise, q);
    if (observer) observer(it + 1, q);
  }
  return q;
}

BinaryMask LabelsFromQ(const Image<float>& q) {
  BinaryMask out{Image<std::uint8_t>(q.width(), q.height()), MaskKind::kRefined};
  const auto src = q.data();
  auto dst = out.bits.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = src[2 * i] > src[2 * i + 1] ? 1 : 0;
  }
  return out;
}

BinaryMask MeanFieldExact(const Tile& tile, const UnaryField& unary,
                          const CrfParams& params) {
  return LabelsFromQ(MeanFieldExactQ(tile, unary, params));
}

BinaryMask MeanFieldFast(const Tile& tile, const UnaryField& unary,
                         const CrfParams& params) {
  return LabelsFromQ(MeanFieldFastQ(tile, unary, params));
}

BinaryMask RefineMask(const Tile& tile, const ProbabilityMap& p,
                      const CrfParams& params, CrfMode mode) {
  const auto unary = UnaryFromProbability(p, params.unary_eps);
  return mode == CrfMode::kExact ? MeanFieldExact(tile, unary, params)
                                 : MeanFieldFast(tile, unary, params);
}

}  // namespace synseg
