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

#include "synseg/error.hpp"

namespace synseg {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kSize: return "SizeError";
    case ErrorCode::kMissingTile: return "MissingTile";
    case ErrorCode::kInsufficientTissue: return "InsufficientTissue";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kBadRequest: return "BadRequest";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnratedRecord: return "UnratedRecord";
    case ErrorCode::kAllRowsEmpty: return "AllRowsEmpty";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kIo: return "IoError";
  }
  return "UnknownError";
}

}  // namespace synseg
