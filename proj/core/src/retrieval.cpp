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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "synseg/error.hpp"
#include "synseg/spt.hpp"

namespace synseg {

using nlohmann::json;

std::string_view MetricName(Metric metric) {
  return metric == Metric::kCosine ? "cosine" : "euclidean";
}

std::optional<Metric> ParseMetric(std::string_view name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  return std::nullopt;
}

double Dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

EmbeddingIndex::EmbeddingIndex(std::span<const float> vectors, std::size_t dim,
                               std::vector<std::string> ids, Metric metric)
    : dim_(dim), metric_(metric), ids_(std::move(ids)) {
  if (vectors.size() != ids_.size() * dim_ || (dim_ == 0 && !ids_.empty())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding matrix has " + std::to_string(vectors.size()) +
                    " values for " + std::to_string(ids_.size()) + " ids of dim " +
                    std::to_string(dim_));
  }
  vectors_.assign(vectors.begin(), vectors.end());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    auto r = std::span<float>(vectors_).subspan(i * dim_, dim_);
    const double norm = std::sqrt(Dot(r, r));
    if (norm == 0.0) {
      throw Error(ErrorCode::kZeroVector, "zero embedding for id " + ids_[i]);
    }
    for (auto& v : r) v = static_cast<float>(v / norm);
    if (!by_id_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::kFormat, "duplicate id " + ids_[i]);
    }
  }
}

std::span<const float> EmbeddingIndex::row(std::size_t i) const {
  return std::span<const float>(vectors_).subspan(i * dim_, dim_);
}

std::optional<std::size_t> EmbeddingIndex::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

double EmbeddingIndex::Score(std::span<const float> query, std::size_t i) const {
  const auto r = row(i);
  if (metric_ == Metric::kCosine) return Dot(query, r);
  double s = 0.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    const double diff = static_cast<double>(query[d]) - r[d];
    s += diff * diff;
  }
  return -std::sqrt(s);
}

std::vector<Neighbor> EmbeddingIndex::Knn(std::span<const float> query, int k) const {
  if (k < 1) throw Error(ErrorCode::kBadRequest, "k must be >= 1");
  if (query.size() != dim_ && !ids_.empty()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has dim " + std::to_string(query.size()) + ", index has " +
                    std::to_string(dim_));
  }
  if (ids_.empty()) return {};

  std::vector<float> q(query.begin(), query.end());
  if (metric_ == Metric::kCosine) {
    const double norm = std::sqrt(Dot(q, q));
    if (norm == 0.0) throw Error(ErrorCode::kZeroVector, "zero query vector");
    for (auto& v : q) v = static_cast<float>(v / norm);
  }

  std::vector<std::pair<double, std::size_t>> scored(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) scored[i] = {Score(q, i), i};
  const auto before = [this](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return ids_[a.second] < ids_[b.second];
  };
  const std::size_t n = std::min(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n),
                    scored.end(), before);

  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({ids_[scored[i].second], scored[i].first, static_cast<int>(i + 1)});
  }
  return out;
}

std::vector<Neighbor> EmbeddingIndex::KnnById(std::string_view id, int k) const {
  const auto i = find(id);
  if (!i) throw Error(ErrorCode::kNotFound, "unknown aggregate id " + std::string(id));
  return Knn(row(*i), k);
}

std::vector<DuplicatePair> EmbeddingIndex::FlagDuplicates(double cutoff) const {
  std::vector<DuplicatePair> out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    for (std::size_t j = i + 1; j < ids_.size(); ++j) {
      const double s = Dot(row(i), row(j));
      if (s < cutoff) continue;
      const bool swap = ids_[j] < ids_[i];
      out.push_back({swap ? ids_[j] : ids_[i], swap ? ids_[i] : ids_[j], s});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  return out;
}

namespace {

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

EmbeddingIndex FromTensor(const Tensor& t, std::vector<std::string> ids, Metric metric) {
  if (t.shape().size() != 2) {
    throw Error(ErrorCode::kDimensionMismatch, "embeddings must be a 2-d tensor");
  }
  if (static_cast<std::size_t>(t.shape()[0]) != ids.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(t.shape()[0]) + " embeddings for " +
                    std::to_string(ids.size()) + " ids");
  }
  return EmbeddingIndex(t.f32(), static_cast<std::size_t>(t.shape()[1]), std::move(ids),
                        metric);
}

}  // namespace

void SaveIndex(const std::filesystem::path& path, const EmbeddingIndex& index) {
  WriteTensor(path, Tensor::FromF32({static_cast<std::int64_t>(index.size()),
                                     static_cast<std::int64_t>(index.dim())},
                                    index.vectors()));
  json sidecar;
  sidecar["ids"] = index.ids();
  sidecar["metric"] = MetricName(index.metric());
  std::ofstream out(SidecarPath(path));
  out << sidecar.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + SidecarPath(path).string());
}

EmbeddingIndex LoadIndex(const std::filesystem::path& path) {
  std::ifstream in(SidecarPath(path));
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + SidecarPath(path).string());
  json sidecar;
  try {
    in >> sidecar;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, "bad index sidecar: " + std::string(e.what()));
  }
  const auto metric = ParseMetric(sidecar.value("metric", "cosine"));
  if (!metric || !sidecar.contains("ids") || !sidecar["ids"].is_array()) {
    throw Error(ErrorCode::kFormat, "bad index sidecar " + SidecarPath(path).string());
  }
  return FromTensor(ReadTensor(path), sidecar["ids"].get<std::vector<std::string>>(),
                    *metric);
}

EmbeddingIndex BuildIndex(const std::filesystem::path& embeddings,
                          const std::filesystem::path& ids_path, Metric metric) {
  std::ifstream in(ids_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + ids_path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return FromTensor(ReadTensor(embeddings), std::move(ids), metric);
}

}  // namespace synseg
