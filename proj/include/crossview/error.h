// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_ERROR_H_
#define CROSSVIEW_ERROR_H_

#include <stdexcept>
#include <string>

namespace crossview {

enum class ErrorCode {
  kUnknownColor,
  kBadMagic,
  kTruncatedFile,
  kDimensionOverflow,
  kNonSquareInput,
  kInvalidConfig,
  kInputTooNarrow,
  kShapeMismatch,
  kChannelOverflow,
  kNonSquare,
  kEmptyRanks,
  kDatasetTooSmall,
  kInvalidArgument,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type; `code()`
// identifies the failure class so callers and tests can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crossview

#endif  // CROSSVIEW_ERROR_H_
