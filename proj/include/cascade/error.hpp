/* Copyright 2026 The Cascade Attack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CASCADE_ERROR_HPP_
#define CASCADE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cascade {

// Base of every error thrown by the toolkit. Callers that only need to
// report a failure can catch this; the subclasses exist so tests and the
// CLI can tell precondition violations from I/O trouble.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes (message names the op and both shapes).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Value outside the domain of an operation (log of non-positive, zero vector).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or violated precondition on user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade

#endif  // CASCADE_ERROR_HPP_
