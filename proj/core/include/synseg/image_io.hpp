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

#include <filesystem>

#include "synseg/imaging.hpp"

namespace synseg {

/// Decodes an 8-bit PNG or TIFF into RGB. Grayscale is expanded, alpha dropped.
RgbImage ReadRgbImage(const std::filesystem::path& path);

void WriteRgbPng(const std::filesystem::path& path, const RgbImage& image);

/// 8-bit PNG, 255 for set bits.
void WriteMaskPng(const std::filesystem::path& path, const BinaryMask& mask);

/// 16-bit grayscale PNG; throws kSize when a label exceeds 65535.
void WriteLabelPng(const std::filesystem::path& path, const InstanceMask& mask);
InstanceMask ReadLabelPng(const std::filesystem::path& path);

}  // namespace synseg
