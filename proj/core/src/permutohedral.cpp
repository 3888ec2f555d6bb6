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

#include "synseg/permutohedral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "synseg/error.hpp"

namespace synseg {
namespace {

// Open-addressing table from integer lattice keys (dim coordinates) to
// dense vertex indices. Each slot stores its index followed by its key so a
// probe touches one record.
class KeyTable {
 public:
  KeyTable(int dim, std::size_t expected)
      : dim_(dim), stride_(static_cast<std::size_t>(dim) + 1) {
    std::size_t cap = 64;
    while (cap < 2 * expected) cap <<= 1;
    Reset(cap);
  }

  std::size_t size() const { return count_; }
  const std::int32_t* key(std::size_t index) const {
    return &keys_[index * static_cast<std::size_t>(dim_)];
  }

  // Returns the vertex index for `k`, inserting when `create` is set;
  // -1 when absent and not created.
  std::int32_t Find(const std::int32_t* k, bool create) {
    return FindHashed(k, Hash(k), create);
  }

  // Lookups are latency bound; callers hash a batch of keys, prefetch their
  // slots, then resolve them with FindHashed.
  std::size_t Hash(const std::int32_t* k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < dim_; ++i) {
      h = (h ^ static_cast<std::uint32_t>(k[i])) * 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h ^ (h >> 32));
  }

  void Prefetch(std::size_t hash) const {
    __builtin_prefetch(&slots_[(hash & (capacity_ - 1)) * stride_]);
  }

  std::int32_t FindHashed(const std::int32_t* k, std::size_t hash, bool create) {
    if (create && 2 * (count_ + 1) > capacity_) Grow();
    const std::size_t mask = capacity_ - 1;
    const std::size_t bytes = sizeof(std::int32_t) * static_cast<std::size_t>(dim_);
    std::size_t h = hash & mask;
    while (true) {
      std::int32_t* slot = &slots_[h * stride_];
      if (slot[0] < 0) {
        if (!create) return -1;
        slot[0] = static_cast<std::int32_t>(count_);
        std::memcpy(slot + 1, k, bytes);
        keys_.insert(keys_.end(), k, k + dim_);
        return static_cast<std::int32_t>(count_++);
      }
      if (std::memcmp(slot + 1, k, bytes) == 0) return slot[0];
      h = (h + 1) & mask;
    }
  }

 private:
  void Reset(std::size_t cap) {
    capacity_ = cap;
    slots_.assign(cap * stride_, 0);
    for (std::size_t i = 0; i < cap; ++i) slots_[i * stride_] = -1;
  }

  void Grow() {
    Reset(capacity_ * 2);
    const std::size_t mask = capacity_ - 1;
    const std::size_t bytes = sizeof(std::int32_t) * static_cast<std::size_t>(dim_);
    for (std::size_t i = 0; i < count_; ++i) {
      std::size_t h = Hash(key(i)) & mask;
      while (slots_[h * stride_] >= 0) h = (h + 1) & mask;
      slots_[h * stride_] = static_cast<std::int32_t>(i);
      std::memcpy(&slots_[h * stride_ + 1], key(i), bytes);
    }
  }

  int dim_;
  std::size_t stride_;
  std::size_t capacity_ = 0;
  std::size_t count_ = 0;
  std::vector<std::int32_t> keys_;
  std::vector<std::int32_t> slots_;
};

}  // namespace

PermutohedralLattice::PermutohedralLattice(std::span<const float> features, int dim)
    : dim_(dim), points_(dim > 0 ? features.size() / static_cast<std::size_t>(dim) : 0) {
  if (dim < 1 || features.size() % static_cast<std::size_t>(dim) != 0) {
    throw Error(ErrorCode::kShape, "feature buffer does not match dimension");
  }
  const int d = dim;
  const auto d1 = static_cast<std::size_t>(d + 1);

  std::vector<float> scale(static_cast<std::size_t>(d));
  const float inv_std = std::sqrt(2.0f / 3.0f) * static_cast<float>(d + 1);
  for (int i = 0; i < d; ++i) {
    scale[static_cast<std::size_t>(i)] =
        inv_std / std::sqrt(static_cast<float>((i + 1) * (i + 2)));
  }
  // canonical[k * (d+1) + i]: coordinate i of the k-th remainder vertex.
  std::vector<std::int32_t> canonical(d1 * d1);
  for (int k = 0; k <= d; ++k) {
    for (int i = 0; i <= d - k; ++i) canonical[static_cast<std::size_t>(k) * d1 + i] = k;
    for (int i = d - k + 1; i <= d; ++i) {
      canonical[static_cast<std::size_t>(k) * d1 + i] = k - (d + 1);
    }
  }

  offsets_.resize(points_ * d1);
  weights_.resize(points_ * d1);
  KeyTable table(d, points_);

  std::vector<float> elevated(d1);
  std::vector<std::int32_t> rem0(d1);
  std::vector<std::int32_t> rank(d1);
  std::vector<float> bary(d1 + 1);
  std::vector<std::int32_t> keys(d1 * static_cast<std::size_t>(d));
  std::vector<std::size_t> hashes(d1);
  const float down = 1.0f / static_cast<float>(d + 1);

  for (std::size_t p = 0; p < points_; ++p) {
    const float* f = &features[p * static_cast<std::size_t>(d)];
    // Elevate onto the hyperplane x . 1 = 0 in d+1 dimensions.
    float sm = 0.0f;
    for (int i = d; i > 0; --i) {
      const float cf = f[i - 1] * scale[static_cast<std::size_t>(i - 1)];
      elevated[static_cast<std::size_t>(i)] = sm - static_cast<float>(i) * cf;
      sm += cf;
    }
    elevated[0] = sm;

    // Nearest remainder-0 point and the rank ordering of the residual.
    int sum = 0;
    for (int i = 0; i <= d; ++i) {
      const float v = elevated[static_cast<std::size_t>(i)] * down;
      const int up = static_cast<int>(std::ceil(v)) * (d + 1);
      const int lo = static_cast<int>(std::floor(v)) * (d + 1);
      const float e = elevated[static_cast<std::size_t>(i)];
      rem0[static_cast<std::size_t>(i)] =
          (static_cast<float>(up) - e < e - static_cast<float>(lo)) ? up : lo;
      sum += rem0[static_cast<std::size_t>(i)];
    }
    sum /= d + 1;
    std::fill(rank.begin(), rank.end(), 0);
    for (int i = 0; i < d; ++i) {
      const float di = elevated[static_cast<std::size_t>(i)] - static_cast<float>(rem0[static_cast<std::size_t>(i)]);
      for (int j = i + 1; j <= d; ++j) {
        const float dj = elevated[static_cast<std::size_t>(j)] - static_cast<float>(rem0[static_cast<std::size_t>(j)]);
        if (di < dj) {
          ++rank[static_cast<std::size_t>(i)];
        } else {
          ++rank[static_cast<std::size_t>(j)];
        }
      }
    }
    if (sum != 0) {
      for (int i = 0; i <= d; ++i) {
        auto& r = rank[static_cast<std::size_t>(i)];
        r += sum;
        if (r < 0) {
          r += d + 1;
          rem0[static_cast<std::size_t>(i)] += d + 1;
        } else if (r > d) {
          r -= d + 1;
          rem0[static_cast<std::size_t>(i)] -= d + 1;
        }
      }
    }

    std::fill(bary.begin(), bary.end(), 0.0f);
    for (int i = 0; i <= d; ++i) {
      const float v = (elevated[static_cast<std::size_t>(i)] -
                       static_cast<float>(rem0[static_cast<std::size_t>(i)])) * down;
      const auto r = static_cast<std::size_t>(rank[static_cast<std::size_t>(i)]);
      bary[static_cast<std::size_t>(d) - r] += v;
      bary[static_cast<std::size_t>(d) - r + 1] -= v;
    }
    bary[0] += 1.0f + bary[d1];

    for (int k = 0; k <= d; ++k) {
      std::int32_t* kk = &keys[static_cast<std::size_t>(k) * static_cast<std::size_t>(d)];
      for (int i = 0; i < d; ++i) {
        kk[i] = rem0[static_cast<std::size_t>(i)] +
                canonical[static_cast<std::size_t>(k) * d1 +
                          static_cast<std::size_t>(rank[static_cast<std::size_t>(i)])];
      }
      hashes[static_cast<std::size_t>(k)] = table.Hash(kk);
      table.Prefetch(hashes[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k <= d; ++k) {
      offsets_[p * d1 + static_cast<std::size_t>(k)] = table.FindHashed(
          &keys[static_cast<std::size_t>(k) * static_cast<std::size_t>(d)],
          hashes[static_cast<std::size_t>(k)], true);
      weights_[p * d1 + static_cast<std::size_t>(k)] = bary[static_cast<std::size_t>(k)];
    }
  }

  vertices_ = table.size();
  neighbors_.assign(d1 * vertices_ * 2, -1);
  // The +1 neighbour along a direction is the vertex whose -1 neighbour we
  // are, so one probe per vertex and direction fills both links.
  constexpr std::size_t kBatch = 16;
  std::vector<std::int32_t> n1(kBatch * static_cast<std::size_t>(d));
  std::array<std::size_t, kBatch> nh{};
  for (int j = 0; j <= d; ++j) {
    const std::size_t base = static_cast<std::size_t>(j) * vertices_;
    for (std::size_t v0 = 0; v0 < vertices_; v0 += kBatch) {
      const std::size_t count = std::min(kBatch, vertices_ - v0);
      for (std::size_t b = 0; b < count; ++b) {
        const std::int32_t* k = table.key(v0 + b);
        std::int32_t* n = &n1[b * static_cast<std::size_t>(d)];
        for (int i = 0; i < d; ++i) n[i] = k[i] - 1;
        if (j < d) n[j] = k[j] + d;
        nh[b] = table.Hash(n);
        table.Prefetch(nh[b]);
      }
      for (std::size_t b = 0; b < count; ++b) {
        const std::int32_t u =
            table.FindHashed(&n1[b * static_cast<std::size_t>(d)], nh[b], false);
        if (u < 0) continue;
        const std::size_t v = v0 + b;
        neighbors_[(base + v) * 2] = u;
        neighbors_[(base + static_cast<std::size_t>(u)) * 2 + 1] = static_cast<std::int32_t>(v);
      }
    }
  }
}

void PermutohedralLattice::Filter(std::span<const float> in, std::span<float> out,
                                  int channels) const {
  const auto c = static_cast<std::size_t>(channels);
  if (channels < 1 || in.size() != points_ * c || out.size() != points_ * c) {
    throw Error(ErrorCode::kShape, "filter buffers do not match the lattice");
  }
  const auto d1 = static_cast<std::size_t>(dim_ + 1);
  // Slot 0 of each buffer is a zero vertex for absent neighbours.
  std::vector<float> values((vertices_ + 1) * c, 0.0f);
  std::vector<float> scratch((vertices_ + 1) * c, 0.0f);

  for (std::size_t p = 0; p < points_; ++p) {
    for (std::size_t k = 0; k < d1; ++k) {
      const auto v = static_cast<std::size_t>(offsets_[p * d1 + k]) + 1;
      const float w = weights_[p * d1 + k];
      for (std::size_t ch = 0; ch < c; ++ch) values[v * c + ch] += w * in[p * c + ch];
    }
  }

  for (std::size_t j = 0; j < d1; ++j) {
    for (std::size_t v = 0; v < vertices_; ++v) {
      const std::size_t base = (j * vertices_ + v) * 2;
      const auto a = static_cast<std::size_t>(neighbors_[base] + 1);
      const auto b = static_cast<std::size_t>(neighbors_[base + 1] + 1);
      for (std::size_t ch = 0; ch < c; ++ch) {
        scratch[(v + 1) * c + ch] =
            values[(v + 1) * c + ch] + 0.5f * (values[a * c + ch] + values[b * c + ch]);
      }
    }
    values.swap(scratch);
  }

  const float alpha = 1.0f / (1.0f + std::pow(2.0f, -static_cast<float>(dim_)));
  for (std::size_t p = 0; p < points_; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] = 0.0f;
    for (std::size_t k = 0; k < d1; ++k) {
      const auto v = static_cast<std::size_t>(offsets_[p * d1 + k]) + 1;
      const float w = weights_[p * d1 + k];
      for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] += w * values[v * c + ch];
    }
    for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] *= alpha;
  }
}

}  // namespace synseg
