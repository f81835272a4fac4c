// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac-track Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace isac {

enum class ErrorCode {
  DegenerateGeometry,
  AngularSingularity,
  ConfigMismatch,
  ZeroSignal,
  AllNonInformative,
  UniformBelief,
  TooDiffuse,
  NoInformativeData,
  NoActiveLinks,
  NoPeak,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the frame scheduler in particular) can decide whether to skip a
/// link, skip a frame or abort.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace isac
