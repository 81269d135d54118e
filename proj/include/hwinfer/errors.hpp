/*
 * Copyright 2026 The hwinfer Authors
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

namespace hwinfer {

// Error taxonomy; the numeric values are shared with the C API status codes
// and the CLI exit codes.
enum class Status : int {
  ok = 0,
  bad_input = 2,
  numeric_failure = 3,
  no_convergence = 4,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& msg)
      : std::runtime_error(msg), status_(status) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

struct BadInput : Error {
  explicit BadInput(const std::string& m) : Error(Status::bad_input, m) {}
};

struct NumericFailure : Error {
  explicit NumericFailure(const std::string& m)
      : Error(Status::numeric_failure, m) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& m)
      : Error(Status::no_convergence, m) {}
};

}  // namespace hwinfer
