// Copyright 2026 The Poke Authors
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

#ifndef POKE_ERROR_H_
#define POKE_ERROR_H_

#include <stdexcept>
#include <string>

namespace poke {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// An index or value fell outside its permitted range.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

// A file did not match the expected binary layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// A numeric computation produced NaN or infinity.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace poke

#endif  // POKE_ERROR_H_
