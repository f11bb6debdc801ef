// Copyright 2026-present the quantann project
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

namespace quantann {

enum class ErrorCode {
    kInvalidArgument,
    kIo,
    kTruncatedRecord,
    kDimensionMismatch,
    kNonPositiveDim,
    kDimensionTooLarge,
    kElementKindMismatch,
    kInvalidValue,
    kTooFewSamples,
    kBadMagic,
    kUnsupportedVersion,
    kTruncatedFile,
    kEmptyCorpus,
    kZeroNorm,
    kCorrupt,
    kLengthMismatch,
};

constexpr std::string_view
to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument:
            return "InvalidArgument";
        case ErrorCode::kIo:
            return "Io";
        case ErrorCode::kTruncatedRecord:
            return "TruncatedRecord";
        case ErrorCode::kDimensionMismatch:
            return "DimensionMismatch";
        case ErrorCode::kNonPositiveDim:
            return "NonPositiveDim";
        case ErrorCode::kDimensionTooLarge:
            return "DimensionTooLarge";
        case ErrorCode::kElementKindMismatch:
            return "ElementKindMismatch";
        case ErrorCode::kInvalidValue:
            return "InvalidValue";
        case ErrorCode::kTooFewSamples:
            return "TooFewSamples";
        case ErrorCode::kBadMagic:
            return "BadMagic";
        case ErrorCode::kUnsupportedVersion:
            return "UnsupportedVersion";
        case ErrorCode::kTruncatedFile:
            return "TruncatedFile";
        case ErrorCode::kEmptyCorpus:
            return "EmptyCorpus";
        case ErrorCode::kZeroNorm:
            return "ZeroNorm";
        case ErrorCode::kCorrupt:
            return "Corrupt";
        case ErrorCode::kLengthMismatch:
            return "LengthMismatch";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {
    }

    ErrorCode
    code() const noexcept {
        return code_;
    }

private:
    ErrorCode code_;
};

}  // namespace quantann
