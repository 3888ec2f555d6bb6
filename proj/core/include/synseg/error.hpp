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

#include <stdexcept>
#include <string>
#include <string_view>

namespace synseg {

enum class ErrorCode {
  kFormat,
  kShape,
  kSize,
  kMissingTile,
  kInsufficientTissue,
  kDimensionMismatch,
  kZeroVector,
  kNotFound,
  kInvalidLabel,
  kBadRequest,
  kEmptyInput,
  kUnratedRecord,
  kAllRowsEmpty,
  kMissingGold,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure raised by the library. `stage()` is non-empty when the error
/// was raised inside run_pipeline and names the stage that failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(ErrorCode code, const std::string& message, std::string stage)
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace synseg
