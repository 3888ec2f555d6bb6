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

#include "synseg/image_io.hpp"

#include <algorithm>
#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace synseg {
namespace {

void Write(const std::filesystem::path& path, const cv::Mat& mat) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace

RgbImage ReadRgbImage(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  if (mat.depth() != CV_8U) {
    throw Error(ErrorCode::kFormat, path.string() + " is not an 8-bit image");
  }
  cv::Mat rgb;
  switch (mat.channels()) {
    case 1: cv::cvtColor(mat, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(mat, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(mat, rgb, cv::COLOR_BGRA2RGB); break;
    default:
      throw Error(ErrorCode::kFormat, path.string() + ": unsupported channel count");
  }
  RgbImage out(rgb.cols, rgb.rows, 3);
  for (int y = 0; y < rgb.rows; ++y) {
    std::memcpy(&out.at(0, y), rgb.ptr<std::uint8_t>(y),
                static_cast<std::size_t>(rgb.cols) * 3);
  }
  return out;
}

void WriteRgbPng(const std::filesystem::path& path, const RgbImage& image) {
  cv::Mat rgb(image.height(), image.width(), CV_8UC3,
              const_cast<std::uint8_t*>(image.data().data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  Write(path, bgr);
}

void WriteMaskPng(const std::filesystem::path& path, const BinaryMask& mask) {
  cv::Mat out(mask.bits.height(), mask.bits.width(), CV_8UC1);
  auto bits = mask.bits.data();
  for (int y = 0; y < out.rows; ++y) {
    auto* row = out.ptr<std::uint8_t>(y);
    for (int x = 0; x < out.cols; ++x) {
      row[x] = bits[static_cast<std::size_t>(y) * out.cols + x] ? 255 : 0;
    }
  }
  Write(path, out);
}

void WriteLabelPng(const std::filesystem::path& path, const InstanceMask& mask) {
  if (mask.label_count > 65535) {
    throw Error(ErrorCode::kSize, "more than 65535 labels cannot be stored as 16-bit PNG");
  }
  cv::Mat out(mask.labels.height(), mask.labels.width(), CV_16UC1);
  auto labels = mask.labels.data();
  for (int y = 0; y < out.rows; ++y) {
    auto* row = out.ptr<std::uint16_t>(y);
    for (int x = 0; x < out.cols; ++x) {
      row[x] = static_cast<std::uint16_t>(
          labels[static_cast<std::size_t>(y) * out.cols + x]);
    }
  }
  Write(path, out);
}

InstanceMask ReadLabelPng(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  if (mat.type() != CV_16UC1) {
    throw Error(ErrorCode::kFormat, path.string() + " is not a 16-bit label image");
  }
  InstanceMask out{Image<std::uint32_t>(mat.cols, mat.rows), 0, {}};
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      out.labels.at(x, y) = row[x];
      out.label_count = std::max<std::uint32_t>(out.label_count, row[x]);
    }
  }
  return out;
}

}  // namespace synseg
