/*
 * Copyright 2026 The RegTop-k Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REGTOPK_ERRORS_H_
#define REGTOPK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace regtopk {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.

// A parameter (k, mu, eta, ...) is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data is malformed: length mismatch, non-finite entry, bad index.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// An operation was called in the wrong lifecycle state (e.g. round 0).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// A numerical procedure failed (singular system, divergence).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace regtopk

#endif  // REGTOPK_ERRORS_H_
