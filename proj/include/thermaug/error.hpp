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
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermaug {

enum class ErrorCode {
  kIoError,
  kSyntaxError,
  kSchemaError,
  kValidationError,
  kCategoryMismatch,
  kUnsupportedFormat,
  kRegionOutOfBounds,
  kNoVisiblePixels,
  kEmptyMask,
  kEmptySpriteLibrary,
  kPlacementExhausted,
  kPoolExhausted,
  kCommandFailed,
  kMissingOutput,
  kExtentMismatch,
  kMaskModified,
  kDanglingReference,
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above. The
/// message names the offending path, id or field where one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string &detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string &message) { throw Error(code, message); }

}  // namespace thermaug
