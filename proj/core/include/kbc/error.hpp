// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed rule text. Carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

/// Invalid scenario, grid or policy settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Broken structural invariant (for example a cycle handed to the reducer).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbc
