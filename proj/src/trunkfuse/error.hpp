// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trunkfuse {

enum class ErrorCode {
  kNonPositiveExtent,
  kDegenerateGeometry,
  kZeroLengthSegment,
  kTooFewPoints,
  kNotAnEllipse,
  kEmptyInput,
  kParseError,
  kSchemaError,
  kIoError,
  kEmptyGroup,
  kNonMonotonicTimestamp,
  kEmptyInstances,
  kFrameMismatch,
  kMissingSceneParameters,
  kUnpairedEdge,
  kMarkerOutsideRegion,
  kSelfIntersection,
  kInvalidSpec,
  kInvalidConfig,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the C
// API maps them one-to-one onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the leading code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Same code, message prefixed with `where: `.
Error with_context(const Error& e, const std::string& where);

}  // namespace trunkfuse
