// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#include "boundrate/error.hpp"

namespace boundrate {

void fail(ErrorCode code, const std::string &what) { throw Error(code, what); }

const char *error_code_name(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::kInvalidArgument:
    return "invalid argument";
  case ErrorCode::kParse:
    return "parse error";
  case ErrorCode::kIo:
    return "i/o error";
  case ErrorCode::kShape:
    return "shape mismatch";
  case ErrorCode::kNumeric:
    return "non-finite value";
  case ErrorCode::kDiverged:
    return "training diverged";
  case ErrorCode::kState:
    return "invalid state";
  }
  return "unknown";
}

} // namespace boundrate
