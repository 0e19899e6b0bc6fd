// Copyright 2026 The relaykey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RELAYKEY_ERROR_HPP_
#define RELAYKEY_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace relaykey {

enum class ErrorCode {
  kNegativeMass,
  kNotNormalized,
  kShapeMismatch,
  kBadIndex,
  kOverlappingGroups,
  kCardinalityExceeded,
  kDomainError,
  kConfigInvalid,
  kMemoryCapExceeded,
  kEnumerationCapExceeded,
  kLengthMismatch,
  kIndexOutOfRange,
  kParseError,
  kUnknownKey,
  kMissingKey,
  kTypeError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNegativeMass: return "NegativeMass";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kOverlappingGroups: return "OverlappingGroups";
    case ErrorCode::kCardinalityExceeded: return "CardinalityExceeded";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kMemoryCapExceeded: return "MemoryCapExceeded";
    case ErrorCode::kEnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kTypeError: return "TypeError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relaykey

#endif  // RELAYKEY_ERROR_HPP_
