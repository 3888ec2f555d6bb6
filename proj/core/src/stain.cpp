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

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

namespace synseg {
namespace {

using Matrix3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

Eigen::Vector3d Normalized(double r, double g, double b) {
  return Eigen::Vector3d(r, g, b).normalized();
}

bool IsForeground(const float* od, double threshold) {
  return static_cast<double>(od[0]) + od[1] + od[2] > threshold;
}

// Minimizes 1/2 h'Gh - b'h + lambda*sum(h) over h >= 0 by cyclic coordinate
// descent, starting from (and overwriting) h. Each coordinate step is an
// exact minimization, so the value never increases.
void SparseCode(const Eigen::Matrix3d& gram, const Eigen::Vector3d& b,
                double lambda, int max_sweeps, double* h) {
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double gkk = gram(k, k);
      if (gkk <= 0.0) {
        change = std::max(change, std::abs(h[k]));
        h[k] = 0.0;
        continue;
      }
      double r = b[k] - lambda;
      for (int j = 0; j < 3; ++j) {
        if (j != k) r -= gram(k, j) * h[j];
      }
      const double next = std::max(0.0, r / gkk);
      change = std::max(change, std::abs(next - h[k]));
      h[k] = next;
    }
    if (change <= 1e-12) break;
  }
}

void SparseCodeAll(const Matrix3X& v, const Eigen::Matrix3d& w, double lambda,
                   int max_sweeps, Matrix3X& h) {
  const Eigen::Matrix3d gram = w.transpose() * w;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const Eigen::Vector3d b = w.transpose() * v.col(j);
    SparseCode(gram, b, lambda, max_sweeps, h.col(j).data());
  }
}

double Objective(const Matrix3X& v, const Eigen::Matrix3d& w,
                 const Matrix3X& h, double lambda) {
  // Column-wise accumulation keeps memory flat for large tiles.
  double fit = 0.0;
  double l1 = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    fit += (v.col(j) - w * h.col(j)).squaredNorm();
    l1 += h.col(j).sum();
  }
  return 0.5 * fit + lambda * l1;
}

// Projection onto {w >= 0, ||w|| <= 1}.
Eigen::Vector3d ProjectColumn(Eigen::Vector3d c) {
  c = c.cwiseMax(0.0);
  const double n = c.norm();
  return n > 1.0 ? Eigen::Vector3d(c / n) : c;
}

}  // namespace

StainBasis DefaultReferenceBasis() {
  StainBasis b;
  b.w.col(0) = Normalized(0.65, 0.70, 0.29);
  b.w.col(1) = Normalized(0.30, 0.85, 0.30);
  b.w.col(2) = Normalized(0.27, 0.57, 0.78);
  return b;
}

std::array<int, 3> AssignRoles(const Eigen::Matrix3d& w,
                               const StainBasis& references) {
  std::array<int, 3> perm = {0, 1, 2};
  std::array<int, 3> best = perm;
  double best_score = -1e300;
  do {
    double score = 0.0;
    for (int role = 0; role < 3; ++role) {
      const Eigen::Vector3d c = w.col(perm[role]);
      const Eigen::Vector3d r = references.w.col(role);
      const double denom = c.norm() * r.norm();
      score += denom > 0.0 ? c.dot(r) / denom : 0.0;
    }
    // Strict > keeps the identity on ties.
    if (score > best_score + 1e-15) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

SnmfResult SnmfDecompose(const OdImage& od, const SnmfOptions& options) {
  if (options.lambda < 0.0 || options.concentration_lambda < 0.0) {
    throw Error(ErrorCode::kBadRequest, "lambda must be nonnegative");
  }
  const auto& img = od.values;
  if (img.channels() != 3) throw Error(ErrorCode::kShape, "OD image must have 3 channels");

  std::vector<Eigen::Index> fg;
  const auto data = img.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    if (IsForeground(&data[3 * i], options.background_threshold)) {
      fg.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (fg.size() < options.min_foreground) {
    throw Error(ErrorCode::kInsufficientTissue,
                "only " + std::to_string(fg.size()) +
                    " foreground pixels; need " +
                    std::to_string(options.min_foreground));
  }

  std::mt19937_64 rng(options.seed);
  std::vector<Eigen::Index> fit = fg;
  if (fit.size() > options.max_fit_pixels) {
    // Partial Fisher-Yates with explicit modulo draws: reproducible across
    // standard libraries.
    for (std::size_t i = 0; i < options.max_fit_pixels; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (fit.size() - i));
      std::swap(fit[i], fit[j]);
    }
    fit.resize(options.max_fit_pixels);
    std::sort(fit.begin(), fit.end());
  }

  Matrix3X v(3, static_cast<Eigen::Index>(fit.size()));
  for (std::size_t j = 0; j < fit.size(); ++j) {
    const float* p = &data[3 * static_cast<std::size_t>(fit[j])];
    v.col(static_cast<Eigen::Index>(j)) << p[0], p[1], p[2];
  }

  // Reference directions plus a seeded multiplicative jitter.
  Eigen::Matrix3d w = options.references.w;
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      w(r, c) *= 1.0 + options.init_perturbation * (2.0 * u - 1.0);
    }
    w.col(c) = w.col(c).cwiseMax(0.0);
    w.col(c).normalize();
  }

  Matrix3X h = Matrix3X::Zero(3, v.cols());
  SnmfResult result;
  result.foreground_pixels = fg.size();
  result.fit_pixels = fit.size();

  SparseCodeAll(v, w, options.lambda, options.max_cd_sweeps, h);
  double prev = Objective(v, w, h, options.lambda);
  result.objective_history.push_back(prev);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    // W-step: projected gradient on the smooth term with step 1/L.
    const Eigen::Matrix3d hht = h * h.transpose();
    const Eigen::Matrix3d vht = v * h.transpose();
    const double lipschitz =
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(hht, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    if (lipschitz > 0.0) {
      for (int step = 0; step < options.w_steps_per_iter; ++step) {
        const Eigen::Matrix3d grad = w * hht - vht;
        Eigen::Matrix3d next = w - grad / lipschitz;
        for (int c = 0; c < 3; ++c) next.col(c) = ProjectColumn(next.col(c));
        w = next;
      }
    }
    // Rescale columns to unit norm. Norms are <= 1, so moving the scale into
    // H keeps W H fixed and can only shrink ||H||_1.
    for (int c = 0; c < 3; ++c) {
      const double n = w.col(c).norm();
      if (n > 0.0) {
        w.col(c) /= n;
        h.row(c) *= n;
      } else {
        w.col(c) = options.references.w.col(c);
        h.row(c).setZero();
      }
    }

    SparseCodeAll(v, w, options.lambda, options.max_cd_sweeps, h);
    const double obj = Objective(v, w, h, options.lambda);
    assert(obj <= prev * (1.0 + 1e-12) + 1e-12);
    result.objective_history.push_back(obj);
    result.iterations = iter + 1;
    const double rel = std::abs(prev - obj) / std::max(std::abs(prev), 1e-300);
    prev = obj;
    if (rel < options.tol) {
      result.converged = true;
      break;
    }
  }

  const auto perm = AssignRoles(w, options.references);
  for (int role = 0; role < 3; ++role) result.basis.w.col(role) = w.col(perm[role]);

  result.concentrations = SolveConcentrations(
      od, result.basis, options.concentration_lambda, options.background_threshold,
      options.max_cd_sweeps);
  return result;
}

ConcentrationMaps SolveConcentrations(const OdImage& od, const StainBasis& basis,
                                      double lambda, double background_threshold,
                                      int max_cd_sweeps) {
  const auto& img = od.values;
  ConcentrationMaps out{Image<float>(img.width(), img.height(), 3),
                        Image<std::uint8_t>(img.width(), img.height())};
  const Eigen::Matrix3d gram = basis.w.transpose() * basis.w;
  const auto src = img.data();
  auto dst = out.h.data();
  auto fg = out.foreground.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const float* p = &src[3 * i];
    fg[i] = IsForeground(p, background_threshold) ? 1 : 0;
    const Eigen::Vector3d v(p[0], p[1], p[2]);
    if (v.squaredNorm() == 0.0) continue;
    const Eigen::Vector3d b = basis.w.transpose() * v;
    double h[3] = {0.0, 0.0, 0.0};
    SparseCode(gram, b, lambda, max_cd_sweeps, h);
    for (int k = 0; k < 3; ++k) dst[3 * i + k] = static_cast<float>(h[k]);
  }
  return out;
}

double SnmfObjective(const OdImage& od, const StainBasis& basis,
                     const ConcentrationMaps& conc, double lambda) {
  const auto v = od.values.data();
  const auto h = conc.h.data();
  const auto fg = conc.foreground.data();
  double fit = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < od.values.pixel_count(); ++i) {
    if (!fg[i]) continue;
    const Eigen::Vector3d vi(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
    const Eigen::Vector3d hi(h[3 * i], h[3 * i + 1], h[3 * i + 2]);
    fit += (vi - basis.w * hi).squaredNorm();
    l1 += hi.sum();
  }
  return 0.5 * fit + lambda * l1;
}

double Percentile(std::vector<float> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of empty sample");
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 *
                     static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo),
                   values.end());
  const double a = values[lo];
  if (hi == lo) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(hi),
                                     values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

ProbabilityMap AlkalineProbability(const ConcentrationMaps& conc,
                                   double percentile, double c_floor) {
  if (!(percentile > 50.0 && percentile <= 100.0) || !(c_floor > 0.0)) {
    throw Error(ErrorCode::kBadRequest,
                "alkaline_probability needs q in (50, 100] and c_floor > 0");
  }
  const int w = conc.h.width();
  const int hgt = conc.h.height();
  ProbabilityMap out{Image<float>(w, hgt), MapKind::kAlkaline};
  const auto h = conc.h.data();
  const auto fg = conc.foreground.data();
  const auto alk = static_cast<std::size_t>(StainRole::kAlkaline);

  std::vector<float> sample;
  for (std::size_t i = 0; i < conc.h.pixel_count(); ++i) {
    if (fg[i]) sample.push_back(h[3 * i + alk]);
  }
  if (sample.empty()) return out;
  const double norm = Percentile(std::move(sample), percentile);
  if (norm < c_floor) return out;
  auto p = out.values.data();
  for (std::size_t i = 0; i < conc.h.pixel_count(); ++i) {
    p[i] = static_cast<float>(std::clamp(h[3 * i + alk] / norm, 0.0, 1.0));
  }
  return out;
}

BinaryMask ThresholdAlkaline(const ProbabilityMap& p) {
  BinaryMask out{Image<std::uint8_t>(p.values.width(), p.values.height()),
                 MaskKind::kAlkaline};
  const auto src = p.values.data();
  auto dst = out.bits.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.5f ? 1 : 0;
  return out;
}

}  // namespace synseg
