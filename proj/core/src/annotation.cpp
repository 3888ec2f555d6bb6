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

#include "synseg/annotation.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "synseg/error.hpp"

namespace synseg {

using nlohmann::json;
using nlohmann::ordered_json;

std::int64_t SystemClockMicros() {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

std::string FormatTimestamp(std::int64_t micros) {
  using namespace std::chrono;
  const sys_time<microseconds> tp{microseconds(micros)};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss<microseconds> hms{tp - day};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%06lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()),
                static_cast<long long>(hms.subseconds().count()));
  return buf;
}

std::int64_t ParseTimestamp(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0;
  int h = 0, mi = 0, s = 0;
  long long us = 0;
  const std::string str(text);
  if (std::sscanf(str.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d.%6lldZ", &y, &mo, &d, &h, &mi, &s,
                  &us) != 7) {
    throw Error(ErrorCode::kFormat, "bad timestamp " + str);
  }
  const year_month_day ymd{year(y), month(mo), day(d)};
  if (!ymd.ok()) throw Error(ErrorCode::kFormat, "bad timestamp " + str);
  const auto tp = sys_days(ymd) + hours(h) + minutes(mi) + seconds(s) + microseconds(us);
  const std::int64_t micros = duration_cast<microseconds>(tp.time_since_epoch()).count();
  if (FormatTimestamp(micros) != str) throw Error(ErrorCode::kFormat, "bad timestamp " + str);
  return micros;
}

std::string AnnotationToJson(const AnnotationRecord& r) {
  ordered_json j;
  j["seq"] = r.seq;
  j["aggregate_id"] = r.aggregate_id;
  j["label"] = ClassLabelName(r.label);
  j["annotator"] = r.annotator;
  j["timestamp"] = FormatTimestamp(r.timestamp);
  j["supersedes"] = r.supersedes ? ordered_json(*r.supersedes) : ordered_json(nullptr);
  return j.dump();
}

AnnotationRecord AnnotationFromJson(std::string_view line) {
  try {
    const json j = json::parse(line);
    AnnotationRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.aggregate_id = j.at("aggregate_id").get<std::string>();
    const auto label = ParseClassLabel(j.at("label").get<std::string>());
    if (!label) throw Error(ErrorCode::kFormat, "unknown label in annotation log");
    r.label = *label;
    r.annotator = j.at("annotator").get<std::string>();
    r.timestamp = ParseTimestamp(j.at("timestamp").get<std::string>());
    if (j.contains("supersedes") && !j["supersedes"].is_null()) {
      r.supersedes = j["supersedes"].get<std::uint64_t>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, "bad annotation line: " + std::string(e.what()));
  }
}

namespace {

using ActiveMap = std::map<std::pair<std::string, std::string>, std::size_t>;

// Appends `r` and updates supersede bookkeeping. With `verify`, the record's
// own seq/supersedes must agree with the state.
void ApplyRecord(std::vector<AnnotationRecord>& records, ActiveMap& active,
                 AnnotationRecord r, bool verify) {
  const auto key = std::make_pair(r.aggregate_id, r.annotator);
  const auto it = active.find(key);
  std::optional<std::uint64_t> expected;
  if (it != active.end()) expected = records[it->second].seq;
  if (verify) {
    if (r.seq != records.size() + 1) {
      throw Error(ErrorCode::kFormat, "annotation log seq " + std::to_string(r.seq) +
                                          " out of order");
    }
    if (r.supersedes != expected) {
      throw Error(ErrorCode::kFormat, "annotation log seq " + std::to_string(r.seq) +
                                          " has inconsistent supersedes");
    }
  }
  if (it != active.end()) records[it->second].superseded = true;
  r.superseded = false;
  active[key] = records.size();
  records.push_back(std::move(r));
}

}  // namespace

std::vector<AnnotationRecord> ReadAnnotationLog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<AnnotationRecord> records;
  ActiveMap active;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ApplyRecord(records, active, AnnotationFromJson(line), true);
  }
  return records;
}

std::map<std::string, ClassLabel> ActiveLabels(const std::vector<AnnotationRecord>& records,
                                               const std::optional<std::string>& annotator) {
  std::map<std::string, ClassLabel> out;
  for (const auto& r : records) {
    if (r.superseded) continue;
    if (annotator && r.annotator != *annotator) continue;
    out[r.aggregate_id] = r.label;
  }
  return out;
}

AnnotationStore::AnnotationStore(std::vector<std::string> known_ids,
                                 std::filesystem::path log_path, Clock clock)
    : known_ids_(std::move(known_ids)), log_path_(std::move(log_path)), clock_(std::move(clock)) {
  std::sort(known_ids_.begin(), known_ids_.end());
  if (log_path_.empty()) return;
  if (std::filesystem::exists(log_path_)) {
    for (auto& r : ReadAnnotationLog(log_path_)) {
      if (!Known(r.aggregate_id)) {
        throw Error(ErrorCode::kFormat,
                    "annotation log references unknown aggregate " + r.aggregate_id);
      }
      last_timestamp_ = std::max(last_timestamp_, r.timestamp);
      ApplyRecord(records_, active_, std::move(r), false);
    }
  }
  log_ = std::fopen(log_path_.c_str(), "a");
  if (!log_) throw Error(ErrorCode::kIo, "cannot open " + log_path_.string());
}

AnnotationStore::~AnnotationStore() {
  if (log_) std::fclose(log_);
}

bool AnnotationStore::Known(std::string_view id) const {
  return std::binary_search(known_ids_.begin(), known_ids_.end(), id);
}

AnnotationRecord AnnotationStore::Submit(std::string_view aggregate_id,
                                         std::string_view label,
                                         std::string_view annotator) {
  const auto parsed = ParseClassLabel(label);
  if (!parsed) throw Error(ErrorCode::kInvalidLabel, "invalid label " + std::string(label));
  if (annotator.empty()) throw Error(ErrorCode::kBadRequest, "annotator is required");

  std::unique_lock lock(mutex_);
  if (!Known(aggregate_id)) {
    throw Error(ErrorCode::kNotFound, "unknown aggregate id " + std::string(aggregate_id));
  }
  AnnotationRecord r;
  r.seq = records_.size() + 1;
  r.aggregate_id = aggregate_id;
  r.label = *parsed;
  r.annotator = annotator;
  r.timestamp = std::max(clock_(), last_timestamp_ + 1);
  const auto it = active_.find({r.aggregate_id, r.annotator});
  if (it != active_.end()) r.supersedes = records_[it->second].seq;

  if (log_) {
    const std::string line = AnnotationToJson(r) + "\n";
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() ||
        std::fflush(log_) != 0 || ::fsync(::fileno(log_)) != 0) {
      throw Error(ErrorCode::kIo, "failed writing " + log_path_.string());
    }
  }
  last_timestamp_ = r.timestamp;
  ApplyRecord(records_, active_, r, false);
  return r;
}

std::vector<AnnotationRecord> AnnotationStore::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::optional<ClassLabel> AnnotationStore::ActiveLabel(
    std::string_view aggregate_id, const std::optional<std::string>& annotator) const {
  std::shared_lock lock(mutex_);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->superseded || it->aggregate_id != aggregate_id) continue;
    if (annotator && it->annotator != *annotator) continue;
    return it->label;
  }
  return std::nullopt;
}

std::map<std::string, ClassLabel> AnnotationStore::ActiveLabels(
    const std::optional<std::string>& annotator) const {
  std::shared_lock lock(mutex_);
  return synseg::ActiveLabels(records_, annotator);
}

std::string AnnotationStore::Serialize() const {
  std::shared_lock lock(mutex_);
  std::string out;
  for (const auto& r : records_) {
    out += AnnotationToJson(r);
    out += r.superseded ? " superseded\n" : " active\n";
  }
  return out;
}

ListFilter ParseListFilter(std::string_view text) {
  ListFilter f;
  if (text.empty() || text == "all") return f;
  if (text == "labeled") {
    f.kind = ListFilterKind::kLabeled;
  } else if (text == "unlabeled") {
    f.kind = ListFilterKind::kUnlabeled;
  } else if (text.starts_with("wsi:") && text.size() > 4) {
    f.wsi_id = std::string(text.substr(4));
  } else {
    throw Error(ErrorCode::kBadRequest, "unknown filter " + std::string(text));
  }
  return f;
}

std::optional<ExportFormat> ParseExportFormat(std::string_view name) {
  if (name == "jsonl") return ExportFormat::kJsonl;
  if (name == "csv") return ExportFormat::kCsv;
  return std::nullopt;
}

ExportResult SplitDataset(const std::map<std::string, ClassLabel>& labels,
                          const std::map<std::string, std::string>& patch_paths,
                          std::uint64_t seed, double val_fraction) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::kBadRequest, "val_fraction must be in (0, 1)");
  }
  std::array<std::vector<std::string>, kClassCount> members;
  for (const auto& [id, label] : labels) {
    members[static_cast<std::size_t>(label)].push_back(id);
  }

  std::array<std::size_t, kClassCount> quota{};
  std::size_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const std::size_t n = members[c].size();
    if (n < 2) continue;
    const double exact = static_cast<double>(n) * val_fraction;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    if (quota[c] + 1 < n) remainders.emplace_back(exact - std::floor(exact), c);
  }
  const auto target =
      static_cast<std::size_t>(std::llround(static_cast<double>(labels.size()) * val_fraction));
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [rem, c] : remainders) {
    if (assigned >= target) break;
    ++quota[c];
    ++assigned;
  }

  ExportResult out;
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < kClassCount; ++c) {
    auto& ids = members[c];
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::swap(ids[i - 1], ids[static_cast<std::size_t>(rng() % i)]);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      ExportRow row;
      row.aggregate_id = ids[i];
      row.label = static_cast<ClassLabel>(c);
      if (auto it = patch_paths.find(ids[i]); it != patch_paths.end()) row.patch_path = it->second;
      row.val = i < quota[c];
      out.rows.push_back(std::move(row));
    }
    out.per_class[c] = {ids.size(), ids.size() - quota[c], quota[c]};
    out.val += quota[c];
    out.train += ids.size() - quota[c];
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const auto& a, const auto& b) { return a.aggregate_id < b.aggregate_id; });
  return out;
}

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string RenderExport(const ExportResult& result, const ExportOptions& options) {
  ordered_json summary;
  summary["total"] = result.rows.size();
  summary["train"] = result.train;
  summary["val"] = result.val;
  summary["seed"] = options.seed;
  summary["val_fraction"] = options.val_fraction;
  summary["annotator"] =
      options.annotator ? ordered_json(*options.annotator) : ordered_json(nullptr);
  ordered_json per_class = ordered_json::object();
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const auto& pc = result.per_class[c];
    per_class[std::string(ClassLabelName(kAllClasses[c]))] = {
        {"total", pc.total}, {"train", pc.train}, {"val", pc.val}};
  }
  summary["per_class"] = per_class;

  std::ostringstream out;
  if (options.format == ExportFormat::kJsonl) {
    out << ordered_json{{"summary", summary}}.dump() << '\n';
    for (const auto& r : result.rows) {
      ordered_json j;
      j["aggregate_id"] = r.aggregate_id;
      j["label"] = ClassLabelName(r.label);
      j["patch_path"] = r.patch_path;
      j["split"] = r.val ? "val" : "train";
      out << j.dump() << '\n';
    }
  } else {
    out << "# summary " << summary.dump() << '\n';
    out << "aggregate_id,label,patch_path,split\n";
    for (const auto& r : result.rows) {
      out << CsvField(r.aggregate_id) << ',' << ClassLabelName(r.label) << ','
          << CsvField(r.patch_path) << ',' << (r.val ? "val" : "train") << '\n';
    }
  }
  return out.str();
}

AnnotationService::AnnotationService(std::vector<AggregateRecord> manifest,
                                     std::shared_ptr<const EmbeddingIndex> index,
                                     std::filesystem::path patch_root,
                                     std::filesystem::path log_path, Clock clock)
    : manifest_(std::move(manifest)), index_(std::move(index)), patch_root_(std::move(patch_root)) {
  std::sort(manifest_.begin(), manifest_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.wsi_id, a.aggregate_id) < std::tie(b.wsi_id, b.aggregate_id);
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < manifest_.size(); ++i) {
    if (!by_id_.emplace(manifest_[i].aggregate_id, i).second) {
      throw Error(ErrorCode::kFormat, "duplicate aggregate id " + manifest_[i].aggregate_id);
    }
    ids.push_back(manifest_[i].aggregate_id);
  }
  store_ = std::make_unique<AnnotationStore>(std::move(ids), std::move(log_path),
                                             std::move(clock));
}

const AggregateRecord& AnnotationService::Aggregate(std::string_view aggregate_id) const {
  const auto it = by_id_.find(std::string(aggregate_id));
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown aggregate id " + std::string(aggregate_id));
  }
  return manifest_[it->second];
}

std::filesystem::path AnnotationService::PatchPath(std::string_view aggregate_id) const {
  const auto& rec = Aggregate(aggregate_id);
  if (rec.patch_ref.empty()) return patch_root_ / (rec.aggregate_id + ".png");
  const std::filesystem::path ref(rec.patch_ref);
  if (ref.is_absolute()) return ref;
  // patch_ref is relative to the segment output; --patches may point at
  // that directory or at its patches/ subdirectory.
  auto full = patch_root_ / ref;
  if (std::filesystem::exists(full)) return full;
  return patch_root_ / ref.filename();
}

std::string AnnotationService::PatchUrl(std::string_view aggregate_id) {
  return "/api/aggregates/" + std::string(aggregate_id) + "/patch";
}

AggregatePage AnnotationService::ListAggregates(int page, int page_size,
                                                const ListFilter& filter) const {
  if (page < 0) throw Error(ErrorCode::kBadRequest, "page must be >= 0");
  if (page_size < 1 || page_size > kMaxPageSize) {
    throw Error(ErrorCode::kBadRequest, "size must be in [1, 500]");
  }
  const auto labels = store_->ActiveLabels();
  AggregatePage out;
  out.page = page;
  out.page_size = page_size;
  const std::size_t begin = static_cast<std::size_t>(page) * static_cast<std::size_t>(page_size);
  for (const auto& rec : manifest_) {
    if (filter.wsi_id && rec.wsi_id != *filter.wsi_id) continue;
    const auto it = labels.find(rec.aggregate_id);
    const bool labeled = it != labels.end();
    if (filter.kind == ListFilterKind::kLabeled && !labeled) continue;
    if (filter.kind == ListFilterKind::kUnlabeled && labeled) continue;
    if (out.total >= begin && out.items.size() < static_cast<std::size_t>(page_size)) {
      out.items.push_back(rec);
      out.items.back().label = labeled ? std::optional(it->second) : std::nullopt;
    }
    ++out.total;
  }
  return out;
}

std::vector<NeighborView> AnnotationService::QueryNeighbors(std::string_view aggregate_id,
                                                            int k) const {
  if (!index_) throw Error(ErrorCode::kNotFound, "no embedding index loaded");
  const auto neighbors = index_->KnnById(aggregate_id, k);
  const auto labels = store_->ActiveLabels();
  std::vector<NeighborView> out;
  out.reserve(neighbors.size());
  for (const auto& n : neighbors) {
    NeighborView v{n, PatchUrl(n.id), std::nullopt};
    if (auto it = labels.find(n.id); it != labels.end()) v.label = it->second;
    out.push_back(std::move(v));
  }
  return out;
}

AnnotationRecord AnnotationService::SubmitAnnotation(std::string_view aggregate_id,
                                                     std::string_view label,
                                                     std::string_view annotator) {
  return store_->Submit(aggregate_id, label, annotator);
}

Progress AnnotationService::GetProgress() const {
  Progress p;
  p.total = manifest_.size();
  for (const auto& [id, label] : store_->ActiveLabels()) {
    ++p.labeled;
    ++p.per_class[static_cast<std::size_t>(label)];
  }
  return p;
}

std::string AnnotationService::ExportDataset(const ExportOptions& options) const {
  std::map<std::string, std::string> paths;
  for (const auto& rec : manifest_) paths[rec.aggregate_id] = rec.patch_ref;
  const auto split = SplitDataset(store_->ActiveLabels(options.annotator), paths,
                                  options.seed, options.val_fraction);
  return RenderExport(split, options);
}

}  // namespace synseg
