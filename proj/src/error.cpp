/**
 * Copyright 2026 The thermaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "thermaug/error.hpp"

namespace thermaug {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kCategoryMismatch: return "CategoryMismatch";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kRegionOutOfBounds: return "RegionOutOfBounds";
    case ErrorCode::kNoVisiblePixels: return "NoVisiblePixels";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kEmptySpriteLibrary: return "EmptySpriteLibrary";
    case ErrorCode::kPlacementExhausted: return "PlacementExhausted";
    case ErrorCode::kPoolExhausted: return "PoolExhausted";
    case ErrorCode::kCommandFailed: return "CommandFailed";
    case ErrorCode::kMissingOutput: return "MissingOutput";
    case ErrorCode::kExtentMismatch: return "ExtentMismatch";
    case ErrorCode::kMaskModified: return "MaskModified";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace thermaug
