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

/// @file metrics.hpp
/// @brief Count agreement, mask-rating tallies and classification scores.
///
/// CSV inputs:
///   counts:      tile_id,manual_count,auto_count
///   predictions: aggregate_id,predicted_label

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synseg/labels.hpp"
#include "synseg/records.hpp"

namespace synseg {

struct CountRow {
  std::string tile_id;
  std::int64_t manual_count = 0;
  std::int64_t auto_count = 0;
};

std::vector<CountRow> ParseCountRows(std::string_view csv_text);

/// Mean over tiles of |auto - manual| / manual. A tile with manual = 0
/// contributes 0 if auto = 0 and 1 otherwise. With `pooled`, returns
/// |sum auto - sum manual| / sum manual instead.
/// Throws kEmptyInput unless some row has manual > 0.
double RelativeCountDifference(const std::vector<CountRow>& rows, bool pooled = false);

struct RatingTally {
  std::array<std::size_t, 3> counts{};  // Good, Medium, Bad
  std::array<double, 3> fractions{};
  std::size_t total = 0;
};

/// Throws kUnratedRecord listing ids without a rating, kEmptyInput if empty.
RatingTally TallyRatings(const std::vector<AggregateRecord>& records);

/// Square matrix; row = true class, column = predicted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kClassCount);

  std::size_t size() const noexcept { return n_; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted);
  std::uint64_t at(std::size_t truth, std::size_t predicted) const;
  void Add(ClassLabel truth, ClassLabel predicted);
  std::uint64_t RowSum(std::size_t row) const;
  std::uint64_t ColSum(std::size_t col) const;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> cells_;
};

/// Mean recall over rows with nonzero support. Throws kAllRowsEmpty.
double BalancedAccuracy(const ConfusionMatrix& cm);

struct ClassificationReport {
  ConfusionMatrix confusion;
  double balanced_accuracy = 0.0;
  std::array<std::uint64_t, kClassCount> support{};
  std::array<std::optional<double>, kClassCount> recall{};     // empty if no support
  std::array<std::optional<double>, kClassCount> precision{};  // empty if never predicted
};

struct Prediction {
  std::string aggregate_id;
  ClassLabel label = ClassLabel::kLewyBody;
};

/// Throws kInvalidLabel on an unknown class name.
std::vector<Prediction> ParsePredictions(std::string_view csv_text);

/// Throws kMissingGold listing predicted ids without a gold label.
ClassificationReport Classify(const std::vector<Prediction>& predictions,
                              const std::map<std::string, ClassLabel>& gold);

std::string ReportToJson(const ClassificationReport& report);
std::string ReportToText(const ClassificationReport& report);

}  // namespace synseg
