// Copyright 2026 The HetNAS Authors
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

#ifndef HETNAS_ERROR_HPP_
#define HETNAS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hetnas {

// Bad configuration or caller misuse. Maps to exit code 1 at the C boundary.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while executing a valid request (I/O, divergence, degenerate math).
// Maps to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetnas

#endif  // HETNAS_ERROR_HPP_
