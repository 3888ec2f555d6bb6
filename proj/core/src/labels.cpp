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

#include "synseg/labels.hpp"

namespace synseg {

std::string_view ClassLabelName(ClassLabel label) {
  switch (label) {
    case ClassLabel::kLewyBody: return "LewyBody";
    case ClassLabel::kAxon: return "Axon";
    case ClassLabel::kDendrite: return "Dendrite";
    case ClassLabel::kUndifferentiatedNeurite: return "UndifferentiatedNeurite";
    case ClassLabel::kMultipleLewyBodies: return "MultipleLewyBodies";
    case ClassLabel::kStainingArtifact: return "StainingArtifact";
  }
  return "";
}

std::optional<ClassLabel> ParseClassLabel(std::string_view name) {
  for (auto c : kAllClasses) {
    if (ClassLabelName(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view MaskRatingName(MaskRating rating) {
  switch (rating) {
    case MaskRating::kGood: return "Good";
    case MaskRating::kMedium: return "Medium";
    case MaskRating::kBad: return "Bad";
  }
  return "";
}

std::optional<MaskRating> ParseMaskRating(std::string_view name) {
  for (auto r : {MaskRating::kGood, MaskRating::kMedium, MaskRating::kBad}) {
    if (MaskRatingName(r) == name) return r;
  }
  return std::nullopt;
}

}  // namespace synseg
