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

#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace synseg {

/// Aggregate morphology classes, in confusion-matrix order.
enum class ClassLabel {
  kLewyBody,
  kAxon,
  kDendrite,
  kUndifferentiatedNeurite,
  kMultipleLewyBodies,
  kStainingArtifact,
};

inline constexpr std::size_t kClassCount = 6;
inline constexpr std::array<ClassLabel, kClassCount> kAllClasses = {
    ClassLabel::kLewyBody,           ClassLabel::kAxon,
    ClassLabel::kDendrite,           ClassLabel::kUndifferentiatedNeurite,
    ClassLabel::kMultipleLewyBodies, ClassLabel::kStainingArtifact,
};

std::string_view ClassLabelName(ClassLabel label);
/// Exact, case-sensitive match against the six names; nullopt otherwise.
std::optional<ClassLabel> ParseClassLabel(std::string_view name);

enum class MaskRating { kGood, kMedium, kBad };

std::string_view MaskRatingName(MaskRating rating);
std::optional<MaskRating> ParseMaskRating(std::string_view name);

}  // namespace synseg
