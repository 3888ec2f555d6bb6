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

/// @file config.hpp
/// @brief JSON forms of stain bases and pipeline parameters.
///
/// StainBasis:
///   {"roles": ["hematoxylin", "alkaline_phosphatase", "dab"],
///    "vectors": [[r, g, b], [r, g, b], [r, g, b]]}   // one unit OD row per role
/// CrfParams and PipelineThresholds use their field names as keys; omitted
/// keys keep their defaults, unknown keys are rejected.

#pragma once

#include <string>
#include <string_view>

#include "synseg/crf.hpp"
#include "synseg/instance.hpp"
#include "synseg/stain.hpp"

namespace synseg {

std::string StainBasisToJson(const StainBasis& basis);
/// Throws kFormat on malformed input or mislabelled roles.
StainBasis StainBasisFromJson(std::string_view text);

std::string CrfParamsToJson(const CrfParams& params);
CrfParams CrfParamsFromJson(std::string_view text);

std::string ThresholdsToJson(const PipelineThresholds& thresholds);
PipelineThresholds ThresholdsFromJson(std::string_view text);

}  // namespace synseg
