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

/// @file spt.hpp
/// @brief SPT dense tensor files.
///
/// Layout, byte for byte:
///   "SPT1"
///   {"dtype":"f32"|"u8"|"u16","shape":[d0,d1,...],"order":"row-major"}\n
///   raw little-endian payload, prod(shape) * sizeof(dtype) bytes
///
/// The JSON header is written compactly with keys in the order above. Readers
/// accept any valid JSON object carrying those keys.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace synseg {

enum class DType { kF32, kU8, kU16 };

std::size_t DTypeSize(DType dtype);

class Tensor {
 public:
  Tensor() = default;
  Tensor(DType dtype, std::vector<std::int64_t> shape);

  static Tensor FromF32(std::vector<std::int64_t> shape,
                        std::span<const float> values);

  DType dtype() const noexcept { return dtype_; }
  const std::vector<std::int64_t>& shape() const noexcept { return shape_; }
  std::size_t element_count() const noexcept;

  /// Typed views; throw kFormat on dtype mismatch.
  std::span<float> f32();
  std::span<const float> f32() const;
  std::span<std::uint8_t> u8();
  std::span<const std::uint8_t> u8() const;
  std::span<std::uint16_t> u16();
  std::span<const std::uint16_t> u16() const;

  bool operator==(const Tensor&) const = default;

 private:
  void check(DType expected) const;

  DType dtype_ = DType::kF32;
  std::vector<std::int64_t> shape_;
  // Native-endian storage; converted to little-endian on write.
  std::vector<std::byte> bytes_;
};

void WriteTensor(std::ostream& out, const Tensor& tensor);
Tensor ReadTensor(std::istream& in);

void WriteTensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor ReadTensor(const std::filesystem::path& path);

}  // namespace synseg
