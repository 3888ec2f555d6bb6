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

#include "synseg/spt.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "json.hpp"
#include "synseg/error.hpp"

namespace synseg {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'T', '1'};
// Guards against absurd headers before allocating.
constexpr std::size_t kMaxHeaderBytes = 1 << 16;

std::string_view DTypeName(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "f32";
    case DType::kU8: return "u8";
    case DType::kU16: return "u16";
  }
  return "?";
}

DType ParseDType(const std::string& name) {
  if (name == "f32") return DType::kF32;
  if (name == "u8") return DType::kU8;
  if (name == "u16") return DType::kU16;
  throw Error(ErrorCode::kFormat, "unsupported SPT dtype '" + name + "'");
}

// Byte-swaps element-wise in place when the host is big-endian.
void ToLittleEndian(std::vector<std::byte>& bytes, std::size_t width) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i + width <= bytes.size(); i += width) {
      std::reverse(bytes.begin() + i, bytes.begin() + i + width);
    }
  } else {
    (void)bytes;
    (void)width;
  }
}

std::size_t CountElements(const std::vector<std::int64_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw Error(ErrorCode::kFormat, "negative SPT dimension");
    const auto ud = static_cast<std::size_t>(d);
    if (ud != 0 && n > std::numeric_limits<std::size_t>::max() / ud) {
      throw Error(ErrorCode::kFormat, "SPT shape overflows");
    }
    n *= ud;
  }
  return n;
}

}  // namespace

std::size_t DTypeSize(DType dtype) {
  switch (dtype) {
    case DType::kF32: return 4;
    case DType::kU8: return 1;
    case DType::kU16: return 2;
  }
  return 0;
}

Tensor::Tensor(DType dtype, std::vector<std::int64_t> shape)
    : dtype_(dtype), shape_(std::move(shape)) {
  bytes_.assign(CountElements(shape_) * DTypeSize(dtype_), std::byte{0});
}

Tensor Tensor::FromF32(std::vector<std::int64_t> shape,
                       std::span<const float> values) {
  Tensor t(DType::kF32, std::move(shape));
  if (values.size() != t.element_count()) {
    throw Error(ErrorCode::kShape, "value count does not match tensor shape");
  }
  std::memcpy(t.bytes_.data(), values.data(), values.size_bytes());
  return t;
}

std::size_t Tensor::element_count() const noexcept {
  return bytes_.size() / DTypeSize(dtype_);
}

void Tensor::check(DType expected) const {
  if (dtype_ != expected) {
    throw Error(ErrorCode::kFormat,
                "tensor dtype is " + std::string(DTypeName(dtype_)) +
                    ", expected " + std::string(DTypeName(expected)));
  }
}

std::span<float> Tensor::f32() {
  check(DType::kF32);
  return {reinterpret_cast<float*>(bytes_.data()), element_count()};
}
std::span<const float> Tensor::f32() const {
  check(DType::kF32);
  return {reinterpret_cast<const float*>(bytes_.data()), element_count()};
}
std::span<std::uint8_t> Tensor::u8() {
  check(DType::kU8);
  return {reinterpret_cast<std::uint8_t*>(bytes_.data()), element_count()};
}
std::span<const std::uint8_t> Tensor::u8() const {
  check(DType::kU8);
  return {reinterpret_cast<const std::uint8_t*>(bytes_.data()),
          element_count()};
}
std::span<std::uint16_t> Tensor::u16() {
  check(DType::kU16);
  return {reinterpret_cast<std::uint16_t*>(bytes_.data()), element_count()};
}
std::span<const std::uint16_t> Tensor::u16() const {
  check(DType::kU16);
  return {reinterpret_cast<const std::uint16_t*>(bytes_.data()),
          element_count()};
}

void WriteTensor(std::ostream& out, const Tensor& tensor) {
  nlohmann::ordered_json header;
  header["dtype"] = DTypeName(tensor.dtype());
  header["shape"] = tensor.shape();
  header["order"] = "row-major";
  out.write(kMagic, sizeof(kMagic));
  const std::string line = header.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));

  std::span<const std::byte> payload;
  switch (tensor.dtype()) {
    case DType::kF32: payload = std::as_bytes(tensor.f32()); break;
    case DType::kU8: payload = std::as_bytes(tensor.u8()); break;
    case DType::kU16: payload = std::as_bytes(tensor.u16()); break;
  }
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
  } else {
    std::vector<std::byte> le(payload.begin(), payload.end());
    ToLittleEndian(le, DTypeSize(tensor.dtype()));
    out.write(reinterpret_cast<const char*>(le.data()),
              static_cast<std::streamsize>(le.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing SPT tensor");
}

Tensor ReadTensor(std::istream& in) {
  char magic[4] = {};
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kFormat, "bad SPT magic");
  }
  std::string line;
  char c = 0;
  while (in.get(c) && c != '\n') {
    line.push_back(c);
    if (line.size() > kMaxHeaderBytes) {
      throw Error(ErrorCode::kFormat, "SPT header too long");
    }
  }
  if (c != '\n') throw Error(ErrorCode::kFormat, "unterminated SPT header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad SPT header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("dtype") ||
      !header.contains("shape") || !header["shape"].is_array()) {
    throw Error(ErrorCode::kFormat, "SPT header lacks dtype/shape");
  }
  if (header.contains("order") && header["order"] != "row-major") {
    throw Error(ErrorCode::kFormat, "only row-major SPT tensors are supported");
  }
  std::vector<std::int64_t> shape;
  for (const auto& d : header["shape"]) {
    if (!d.is_number_integer()) {
      throw Error(ErrorCode::kFormat, "non-integer SPT dimension");
    }
    shape.push_back(d.get<std::int64_t>());
  }
  const DType dtype = ParseDType(header["dtype"].get<std::string>());
  const std::size_t expected = CountElements(shape) * DTypeSize(dtype);

  // Read the payload before allocating the tensor so a truncated file with a
  // huge declared shape does not allocate.
  std::vector<std::byte> payload;
  payload.reserve(std::min<std::size_t>(expected, std::size_t{1} << 26));
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    if (payload.size() + n > expected) {
      throw Error(ErrorCode::kFormat, "SPT payload longer than header shape");
    }
    const auto* p = reinterpret_cast<const std::byte*>(buf);
    payload.insert(payload.end(), p, p + n);
  }
  if (payload.size() != expected) {
    throw Error(ErrorCode::kFormat,
                "SPT payload has " + std::to_string(payload.size()) +
                    " bytes, header shape requires " +
                    std::to_string(expected));
  }
  ToLittleEndian(payload, DTypeSize(dtype));

  Tensor t(dtype, std::move(shape));
  std::span<std::byte> dst;
  switch (dtype) {
    case DType::kF32: dst = std::as_writable_bytes(t.f32()); break;
    case DType::kU8: dst = std::as_writable_bytes(t.u8()); break;
    case DType::kU16: dst = std::as_writable_bytes(t.u16()); break;
  }
  std::memcpy(dst.data(), payload.data(), payload.size());
  return t;
}

void WriteTensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  WriteTensor(out, tensor);
}

Tensor ReadTensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadTensor(in);
}

}  // namespace synseg
