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

/// @file annotation.hpp
/// @brief Expert label store backed by an append-only JSONL log, plus the
/// queries the annotation HTTP API is built on.
///
/// Log line:
///   {"seq":N,"aggregate_id":"...","label":"Axon","annotator":"...",
///    "timestamp":"2026-01-02T03:04:05.123456Z","supersedes":M|null}
/// `supersedes` is the seq of the record by the same annotator on the same
/// aggregate that this one replaces. Superseded flags are derived on replay.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "synseg/labels.hpp"
#include "synseg/records.hpp"
#include "synseg/retrieval.hpp"

namespace synseg {

/// Microseconds since the Unix epoch, UTC.
using Clock = std::function<std::int64_t()>;
std::int64_t SystemClockMicros();
std::string FormatTimestamp(std::int64_t micros);
/// Accepts the format written by FormatTimestamp; throws kFormat otherwise.
std::int64_t ParseTimestamp(std::string_view text);

struct AnnotationRecord {
  std::uint64_t seq = 0;
  std::string aggregate_id;
  ClassLabel label = ClassLabel::kLewyBody;
  std::string annotator;
  std::int64_t timestamp = 0;
  std::optional<std::uint64_t> supersedes;
  bool superseded = false;

  bool operator==(const AnnotationRecord&) const = default;
};

std::string AnnotationToJson(const AnnotationRecord& record);
AnnotationRecord AnnotationFromJson(std::string_view line);

/// Parses a log and derives superseded flags. Throws kFormat on bad lines,
/// non-contiguous seq, or a `supersedes` that does not match the replayed state.
std::vector<AnnotationRecord> ReadAnnotationLog(const std::filesystem::path& path);

/// Most recent active label per aggregate, optionally for one annotator only.
std::map<std::string, ClassLabel> ActiveLabels(
    const std::vector<AnnotationRecord>& records,
    const std::optional<std::string>& annotator = std::nullopt);

/// Thread-safe annotation state. Submissions are serialized and written to the
/// log (flushed and fsynced) before they become visible.
class AnnotationStore {
 public:
  /// `known_ids` restricts which aggregates may be labelled; empty path means
  /// no log (in-memory only). An existing log is replayed.
  AnnotationStore(std::vector<std::string> known_ids, std::filesystem::path log_path,
                  Clock clock = SystemClockMicros);
  ~AnnotationStore();

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  /// Throws kInvalidLabel, kNotFound, kBadRequest (empty annotator), kIo.
  AnnotationRecord Submit(std::string_view aggregate_id, std::string_view label,
                          std::string_view annotator);

  std::vector<AnnotationRecord> records() const;
  std::optional<ClassLabel> ActiveLabel(
      std::string_view aggregate_id,
      const std::optional<std::string>& annotator = std::nullopt) const;
  std::map<std::string, ClassLabel> ActiveLabels(
      const std::optional<std::string>& annotator = std::nullopt) const;

  /// Canonical serialization of the full state: one log line per record
  /// followed by its superseded flag.
  std::string Serialize() const;

 private:
  void Apply(AnnotationRecord record);
  bool Known(std::string_view id) const;

  std::vector<std::string> known_ids_;
  std::filesystem::path log_path_;
  Clock clock_;
  std::FILE* log_ = nullptr;
  mutable std::shared_mutex mutex_;
  std::vector<AnnotationRecord> records_;
  std::map<std::pair<std::string, std::string>, std::size_t> active_;
  std::int64_t last_timestamp_ = 0;
};

enum class ListFilterKind { kAll, kLabeled, kUnlabeled };

struct ListFilter {
  ListFilterKind kind = ListFilterKind::kAll;
  std::optional<std::string> wsi_id;
};

/// "all" | "labeled" | "unlabeled" | "wsi:<id>"; throws kBadRequest.
ListFilter ParseListFilter(std::string_view text);

inline constexpr int kMaxPageSize = 500;

struct AggregatePage {
  std::vector<AggregateRecord> items;  // label set from the store
  std::size_t total = 0;               // matching the filter
  int page = 0;
  int page_size = 0;
};

struct NeighborView {
  Neighbor neighbor;
  std::string patch_url;
  std::optional<ClassLabel> label;
};

struct Progress {
  std::size_t labeled = 0;
  std::size_t total = 0;
  std::array<std::size_t, kClassCount> per_class{};
};

enum class ExportFormat { kJsonl, kCsv };
std::optional<ExportFormat> ParseExportFormat(std::string_view name);

inline constexpr double kDefaultValFraction = 289.0 / 953.0;

struct ExportOptions {
  ExportFormat format = ExportFormat::kJsonl;
  std::uint64_t seed = 42;
  double val_fraction = kDefaultValFraction;
  std::optional<std::string> annotator;
};

struct ExportRow {
  std::string aggregate_id;
  ClassLabel label = ClassLabel::kLewyBody;
  std::string patch_path;
  bool val = false;
};

struct ExportClassCount {
  std::size_t total = 0;
  std::size_t train = 0;
  std::size_t val = 0;
};

struct ExportResult {
  std::vector<ExportRow> rows;  // sorted by aggregate_id
  std::array<ExportClassCount, kClassCount> per_class{};
  std::size_t train = 0;
  std::size_t val = 0;
};

/// Seeded split stratified by class. Per-class validation counts are the
/// floors of n_c * f plus a largest-remainder share of round(N * f);
/// single-member classes always go to train.
ExportResult SplitDataset(const std::map<std::string, ClassLabel>& labels,
                          const std::map<std::string, std::string>& patch_paths,
                          std::uint64_t seed, double val_fraction);

/// Summary header line followed by one row per labelled aggregate.
std::string RenderExport(const ExportResult& result, const ExportOptions& options);

/// Aggregates, embeddings and labels tied together.
class AnnotationService {
 public:
  AnnotationService(std::vector<AggregateRecord> manifest,
                    std::shared_ptr<const EmbeddingIndex> index,
                    std::filesystem::path patch_root,
                    std::filesystem::path log_path, Clock clock = SystemClockMicros);

  AggregatePage ListAggregates(int page, int page_size, const ListFilter& filter) const;
  /// Throws kNotFound for an id absent from the index.
  std::vector<NeighborView> QueryNeighbors(std::string_view aggregate_id,
                                           int k = kDefaultNeighbors) const;
  AnnotationRecord SubmitAnnotation(std::string_view aggregate_id,
                                    std::string_view label, std::string_view annotator);
  Progress GetProgress() const;
  std::string ExportDataset(const ExportOptions& options) const;

  /// Throws kNotFound for an unknown id.
  const AggregateRecord& Aggregate(std::string_view aggregate_id) const;
  std::filesystem::path PatchPath(std::string_view aggregate_id) const;
  static std::string PatchUrl(std::string_view aggregate_id);

  AnnotationStore& store() noexcept { return *store_; }
  const AnnotationStore& store() const noexcept { return *store_; }

 private:
  std::vector<AggregateRecord> manifest_;  // sorted by (wsi_id, aggregate_id)
  std::unordered_map<std::string, std::size_t> by_id_;
  std::shared_ptr<const EmbeddingIndex> index_;
  std::filesystem::path patch_root_;
  std::unique_ptr<AnnotationStore> store_;
};

}  // namespace synseg
