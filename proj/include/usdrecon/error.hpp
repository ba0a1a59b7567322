// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace usdrecon {

enum class ErrorCode {
  kInvalidInput,
  kEmptyIndex,
  kEmptyCloud,
  kDegenerateGeometry,
  kSchema,
  kInvalidEmbedding,
  kDuplicateId,
  kMissingAsset,
  kInsufficientData,
  kDivergence,
  kInvalidMask,
  kParse,
  kInvalidScene,
  kNetwork,
  kTimeout,
  kInvalidResponse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code lets
/// callers branch on the failure kind without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Text-format failure positioned at a 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace usdrecon
