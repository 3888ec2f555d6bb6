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

#include "synseg/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"
#include "synseg/csv.hpp"
#include "synseg/error.hpp"

namespace synseg {

using nlohmann::ordered_json;

namespace {

std::string JoinIds(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    if (i == 20) return out + "... (" + std::to_string(ids.size()) + " total)";
    out += ids[i];
  }
  return out;
}

}  // namespace

std::vector<CountRow> ParseCountRows(std::string_view csv_text) {
  std::vector<CountRow> out;
  for (const auto& row :
       csv::ParseTable(csv_text, {"tile_id", "manual_count", "auto_count"})) {
    CountRow r{row[0], csv::ParseInt(row[1]), csv::ParseInt(row[2])};
    if (r.manual_count < 0 || r.auto_count < 0) {
      throw Error(ErrorCode::kFormat, "negative count for tile " + r.tile_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

double RelativeCountDifference(const std::vector<CountRow>& rows, bool pooled) {
  std::int64_t manual_total = 0;
  std::int64_t auto_total = 0;
  double sum = 0.0;
  for (const auto& r : rows) {
    manual_total += r.manual_count;
    auto_total += r.auto_count;
    if (r.manual_count == 0) {
      sum += r.auto_count > 0 ? 1.0 : 0.0;
    } else {
      sum += static_cast<double>(std::llabs(r.auto_count - r.manual_count)) /
             static_cast<double>(r.manual_count);
    }
  }
  if (manual_total == 0) {
    throw Error(ErrorCode::kEmptyInput, "no tile has a nonzero manual count");
  }
  if (pooled) {
    return static_cast<double>(std::llabs(auto_total - manual_total)) /
           static_cast<double>(manual_total);
  }
  return sum / static_cast<double>(rows.size());
}

RatingTally TallyRatings(const std::vector<AggregateRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no records to tally");
  std::vector<std::string> unrated;
  RatingTally t;
  for (const auto& r : records) {
    if (!r.mask_rating) {
      unrated.push_back(r.aggregate_id);
      continue;
    }
    ++t.counts[static_cast<std::size_t>(*r.mask_rating)];
  }
  if (!unrated.empty()) {
    throw Error(ErrorCode::kUnratedRecord, "unrated records: " + JoinIds(unrated));
  }
  t.total = records.size();
  for (std::size_t i = 0; i < 3; ++i) {
    t.fractions[i] = static_cast<double>(t.counts[i]) / static_cast<double>(t.total);
  }
  return t;
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), cells_(classes * classes) {}

std::uint64_t& ConfusionMatrix::at(std::size_t truth, std::size_t predicted) {
  return cells_[truth * n_ + predicted];
}

std::uint64_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
  return cells_[truth * n_ + predicted];
}

void ConfusionMatrix::Add(ClassLabel truth, ClassLabel predicted) {
  ++at(static_cast<std::size_t>(truth), static_cast<std::size_t>(predicted));
}

std::uint64_t ConfusionMatrix::RowSum(std::size_t row) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(row, j);
  return s;
}

std::uint64_t ConfusionMatrix::ColSum(std::size_t col) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, col);
  return s;
}

double BalancedAccuracy(const ConfusionMatrix& cm) {
  double sum = 0.0;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const auto support = cm.RowSum(i);
    if (support == 0) continue;
    sum += static_cast<double>(cm.at(i, i)) / static_cast<double>(support);
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::kAllRowsEmpty, "confusion matrix has no support");
  return sum / static_cast<double>(rows);
}

std::vector<Prediction> ParsePredictions(std::string_view csv_text) {
  std::vector<Prediction> out;
  for (const auto& row : csv::ParseTable(csv_text, {"aggregate_id", "predicted_label"})) {
    const auto label = ParseClassLabel(row[1]);
    if (!label) {
      throw Error(ErrorCode::kInvalidLabel,
                  "invalid label " + row[1] + " for aggregate " + row[0]);
    }
    out.push_back({row[0], *label});
  }
  return out;
}

ClassificationReport Classify(const std::vector<Prediction>& predictions,
                              const std::map<std::string, ClassLabel>& gold) {
  std::vector<std::string> missing;
  ClassificationReport report;
  for (const auto& p : predictions) {
    const auto it = gold.find(p.aggregate_id);
    if (it == gold.end()) {
      missing.push_back(p.aggregate_id);
      continue;
    }
    report.confusion.Add(it->second, p.label);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::kMissingGold, "no gold label for: " + JoinIds(missing));
  }
  report.balanced_accuracy = BalancedAccuracy(report.confusion);
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const auto& cm = report.confusion;
    report.support[c] = cm.RowSum(c);
    if (report.support[c] > 0) {
      report.recall[c] =
          static_cast<double>(cm.at(c, c)) / static_cast<double>(report.support[c]);
    }
    if (const auto predicted = cm.ColSum(c); predicted > 0) {
      report.precision[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(predicted);
    }
  }
  return report;
}

std::string ReportToJson(const ClassificationReport& report) {
  ordered_json j;
  ordered_json labels = ordered_json::array();
  ordered_json matrix = ordered_json::array();
  for (std::size_t i = 0; i < kClassCount; ++i) {
    labels.push_back(ClassLabelName(kAllClasses[i]));
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < kClassCount; ++k) row.push_back(report.confusion.at(i, k));
    matrix.push_back(row);
  }
  j["labels"] = labels;
  j["confusion_matrix"] = matrix;
  j["balanced_accuracy"] = report.balanced_accuracy;
  ordered_json per_class = ordered_json::object();
  for (std::size_t c = 0; c < kClassCount; ++c) {
    ordered_json e;
    e["support"] = report.support[c];
    e["recall"] = report.recall[c] ? ordered_json(*report.recall[c]) : ordered_json(nullptr);
    e["precision"] =
        report.precision[c] ? ordered_json(*report.precision[c]) : ordered_json(nullptr);
    per_class[std::string(ClassLabelName(kAllClasses[c]))] = e;
  }
  j["per_class"] = per_class;
  j["note"] = "classes with zero support are excluded from balanced accuracy";
  return j.dump(2);
}

std::string ReportToText(const ClassificationReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %8s %8s %10s\n", "class", "support", "recall",
                "precision");
  out += buf;
  auto fmt = [](const std::optional<double>& v) {
    char b[16];
    if (!v) return std::string("-");
    std::snprintf(b, sizeof(b), "%.4f", *v);
    return std::string(b);
  };
  for (std::size_t c = 0; c < kClassCount; ++c) {
    std::snprintf(buf, sizeof(buf), "%-24s %8llu %8s %10s\n",
                  std::string(ClassLabelName(kAllClasses[c])).c_str(),
                  static_cast<unsigned long long>(report.support[c]),
                  fmt(report.recall[c]).c_str(), fmt(report.precision[c]).c_str());
    out += buf;
  }
  out += "\nconfusion matrix (rows = true, columns = predicted)\n";
  for (std::size_t i = 0; i < kClassCount; ++i) {
    for (std::size_t k = 0; k < kClassCount; ++k) {
      std::snprintf(buf, sizeof(buf), "%6llu",
                    static_cast<unsigned long long>(report.confusion.at(i, k)));
      out += buf;
    }
    out += '\n';
  }
  std::snprintf(buf, sizeof(buf),
                "\nbalanced accuracy: %.4f (zero-support classes excluded)\n",
                report.balanced_accuracy);
  return out + buf;
}

}  // namespace synseg
