// Copyright (c) the DSIN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSIN_BASE_H_
#define DSIN_BASE_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsin {

// Precondition/domain violations (bad arguments, out-of-range values,
// malformed configs). Thrown by every public operation documented to
// reject its input.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Broken files, hash mismatches, truncated payloads.
class CorruptStreamError : public std::runtime_error {
 public:
  explicit CorruptStreamError(const std::string& msg)
      : std::runtime_error(msg) {}
};

#define DSIN_REQUIRE(cond, msg)          \
  do {                                   \
    if (!(cond)) {                       \
      throw ::dsin::DomainError(msg);    \
    }                                    \
  } while (0)

#define DSIN_CHECK(cond, msg)                 \
  do {                                        \
    if (!(cond)) {                            \
      throw ::std::runtime_error(msg);        \
    }                                         \
  } while (0)

inline int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace dsin

#endif  // DSIN_BASE_H_
