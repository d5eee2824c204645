// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The boundrate Authors

#pragma once

#include <stdexcept>
#include <string>

namespace boundrate {

/// Failure categories. Values mirror the br_status codes of the C API.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kShape = 4,
  kNumeric = 5,
  kDiverged = 6,
  kState = 7,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &what);

const char *error_code_name(ErrorCode code) noexcept;

} // namespace boundrate
