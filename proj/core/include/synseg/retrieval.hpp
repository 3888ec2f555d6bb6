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

/// @file retrieval.hpp
/// @brief Exact nearest-neighbour search over aggregate embeddings.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace synseg {

enum class Metric { kCosine, kEuclidean };

std::string_view MetricName(Metric metric);
std::optional<Metric> ParseMetric(std::string_view name);

inline constexpr int kDefaultNeighbors = 250;
inline constexpr double kDefaultDuplicateCutoff = 0.995;

struct Neighbor {
  std::string id;
  double score = 0.0;  // cosine similarity, or negative Euclidean distance
  int rank = 0;        // 1-based

  bool operator==(const Neighbor&) const = default;
};

struct DuplicatePair {
  std::string first;   // first < second
  std::string second;
  double similarity = 0.0;

  bool operator==(const DuplicatePair&) const = default;
};

/// Immutable M x D matrix of unit rows keyed by aggregate id.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;

  /// `vectors` is row-major M x D. Rows are L2-normalized on ingest.
  /// Throws kDimensionMismatch if sizes disagree, kZeroVector naming the id of
  /// an all-zero row, kFormat on duplicate ids.
  EmbeddingIndex(std::span<const float> vectors, std::size_t dim,
                 std::vector<std::string> ids, Metric metric = Metric::kCosine);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  Metric metric() const noexcept { return metric_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> vectors() const noexcept { return vectors_; }
  std::span<const float> row(std::size_t i) const;
  std::optional<std::size_t> find(std::string_view id) const;

  /// Exact top-k. Ties are broken by ascending id. Returns min(k, M) results.
  /// Throws kDimensionMismatch on a wrong query length, kBadRequest if k < 1,
  /// kZeroVector for an all-zero cosine query.
  std::vector<Neighbor> Knn(std::span<const float> query,
                            int k = kDefaultNeighbors) const;

  /// Knn using a stored row as the query.
  std::vector<Neighbor> KnnById(std::string_view id, int k = kDefaultNeighbors) const;

  /// Every unordered pair with cosine similarity >= cutoff, sorted by
  /// (first, second).
  std::vector<DuplicatePair> FlagDuplicates(
      double cutoff = kDefaultDuplicateCutoff) const;

 private:
  double Score(std::span<const float> query, std::size_t row) const;

  std::size_t dim_ = 0;
  Metric metric_ = Metric::kCosine;
  std::vector<float> vectors_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

double Dot(std::span<const float> a, std::span<const float> b);

/// Index files: the SPT matrix at `path` plus `<path>.json` holding
/// {"ids": [...], "metric": "cosine"|"euclidean"}.
void SaveIndex(const std::filesystem::path& path, const EmbeddingIndex& index);
EmbeddingIndex LoadIndex(const std::filesystem::path& path);

/// Reads an SPT f32 [M, D] embedding file and a text file with one id per
/// line (blank lines ignored).
EmbeddingIndex BuildIndex(const std::filesystem::path& embeddings,
                          const std::filesystem::path& ids,
                          Metric metric = Metric::kCosine);

}  // namespace synseg
