// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/error.hpp"

namespace trunkfuse {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveExtent: return "NonPositiveExtent";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNotAnEllipse: return "NotAnEllipse";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kNonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::kEmptyInstances: return "EmptyInstances";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kMissingSceneParameters: return "MissingSceneParameters";
    case ErrorCode::kUnpairedEdge: return "UnpairedEdge";
    case ErrorCode::kMarkerOutsideRegion: return "MarkerOutsideRegion";
    case ErrorCode::kSelfIntersection: return "SelfIntersection";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error with_context(const Error& e, const std::string& where) {
  return Error(e.code(), where + ": " + e.detail());
}

}  // namespace trunkfuse
