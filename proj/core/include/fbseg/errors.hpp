// Copyright 2026 The fbseg Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbseg {

// Base class for every error raised by the library. The CLI maps IoError to
// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing, unreadable or unwritable files and directories.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file that exists but does not hold what we expect (bad header,
// wrong dimensionality, truncated payload).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Data that parsed fine but violates a contract (shape mismatch, NaN voxels,
// non-binary masks, missing mask for a training entry).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: bad patch sizes, broken plans, thresholds outside
// their domain, empty validation sets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Text input that does not follow its grammar. Carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-finite values produced during training or inference.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fbseg
