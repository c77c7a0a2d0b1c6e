/*
 * Copyright 2026 The xbarsec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace xbarsec {

/// Category of a failure. Mirrors the status codes of the C interface.
enum class ErrorKind {
  InvalidArgument,
  Shape,
  Length,
  Range,
  Lookup,
  Format,
  Io,
  State,
  Solver,
  Calibration,
};

/// Exception type thrown by every module of the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Length: return "length";
    case ErrorKind::Range: return "range";
    case ErrorKind::Lookup: return "lookup";
    case ErrorKind::Format: return "format";
    case ErrorKind::Io: return "io";
    case ErrorKind::State: return "state";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Calibration: return "calibration";
  }
  return "unknown";
}

}  // namespace xbarsec
