/*
 * Copyright 2025 The seraser authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SERASER_ERRORS_HPP_
#define SERASER_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace seraser {

// Domain error types. Plain std::invalid_argument is used for precondition
// violations; the types below carry a distinct meaning callers dispatch on.

class DivergenceUndefinedError : public std::runtime_error {
 public:
  explicit DivergenceUndefinedError(const std::string& what)
      : std::runtime_error(what) {}
};

class EmptyBackgroundError : public std::runtime_error {
 public:
  explicit EmptyBackgroundError(const std::string& what)
      : std::runtime_error(what) {}
};

class NoForegroundError : public std::runtime_error {
 public:
  explicit NoForegroundError(const std::string& what)
      : std::runtime_error(what) {}
};

class UnsupportedOperationError : public std::runtime_error {
 public:
  explicit UnsupportedOperationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Non-finite loss during prompt optimization; remembers the failing step.
class NumericFailureError : public std::runtime_error {
 public:
  NumericFailureError(const std::string& what, int step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// An auxiliary strategy cannot run because a required input is missing.
// The message names the missing input (e.g. the mask path).
class StrategyUnavailableError : public std::runtime_error {
 public:
  explicit StrategyUnavailableError(const std::string& what)
      : std::runtime_error(what) {}
};

class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed config / manifest / report content.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seraser

#endif  // SERASER_ERRORS_HPP_
