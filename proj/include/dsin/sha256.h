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

#ifndef DSIN_SHA256_H_
#define DSIN_SHA256_H_

#include <array>
#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

namespace dsin {

using Sha256Digest = std::array<uint8_t, 32>;

Sha256Digest Sha256(const uint8_t* data, size_t len);
Sha256Digest Sha256(const std::vector<uint8_t>& data);

// Digest of a file's full contents. Throws on I/O failure.
Sha256Digest Sha256File(const std::string& path);

std::string DigestToHex(const Sha256Digest& d);

}  // namespace dsin

#endif  // DSIN_SHA256_H_
