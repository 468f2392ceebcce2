// Copyright 2026 The Crowdmimic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace crowdmimic {

/// Base error carrying the process exit code the CLI maps it to:
/// 2 usage/config, 3 I/O or bad input data, 4 runtime abort.
class Error : public std::runtime_error {
 public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Bad flags, bad config keys or values, incompatible shapes.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(std::move(msg), 2) {}
};

/// Missing, unreadable or unwritable files.
class IoError : public Error {
 public:
  explicit IoError(std::string msg) : Error(std::move(msg), 3) {}
};

/// Malformed file content; the message names the offending line.
class ParseError : public IoError {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : IoError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Data that parses but cannot be used: empty datasets, degenerate
/// tracklets, impossible splits.
class DataError : public Error {
 public:
  explicit DataError(std::string msg) : Error(std::move(msg), 3) {}
};

/// Numerical failure at run time: divergence, non-finite inputs,
/// aborted training.
class NumericError : public Error {
 public:
  explicit NumericError(std::string msg) : Error(std::move(msg), 4) {}
};

}  // namespace crowdmimic
