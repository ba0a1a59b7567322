// SPDX-License-Identifier: Apache-2.0
#include "usdrecon/error.hpp"

namespace usdrecon {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kEmptyIndex: return "empty-index";
    case ErrorCode::kEmptyCloud: return "empty-cloud";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kInvalidEmbedding: return "invalid-embedding";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kMissingAsset: return "missing-asset";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kInvalidMask: return "invalid-mask";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInvalidScene: return "invalid-scene";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kInvalidResponse: return "invalid-response";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error(ErrorCode::kParse,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace usdrecon
