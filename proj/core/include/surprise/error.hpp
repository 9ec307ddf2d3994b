// Copyright 2026 The Surprise Potential Authors
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

namespace surprise {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: malformed records, violated invariants, missing keys.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation precondition (bad argument values).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A counterfactual generator could not produce any admissible variant.
class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

/// Numerical failure inside a metric or solver.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace surprise
