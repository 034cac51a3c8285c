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

// Bitstream container: "DSIN" magic, little-endian u64 fields (version,
// image dims, latent dims, center count), the SHA-256 of the checkpoint
// that produced the stream, the payload length, then the range-coded
// symbols in channel-major, row, column order. Decoding never looks at the
// side image; side information only refines the already-decoded result.

#ifndef DSIN_CONTAINER_H_
#define DSIN_CONTAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dsin/checkpoint.h"
#include "dsin/image.h"
#include "dsin/sha256.h"

namespace dsin {

struct DsinHeader {
  uint64_t version = 1;
  uint64_t image_h = 0, image_w = 0;
  uint64_t latent_h = 0, latent_w = 0, latent_c = 0;
  uint64_t num_centers = 0;
  Sha256Digest model_hash{};
  uint64_t payload_bytes = 0;
};

inline constexpr size_t kDsinHeaderBytes = 4 + 8 * 8 + 32;

struct CompressResult {
  uint64_t file_bytes = 0;
  uint64_t payload_bytes = 0;
  double bits_estimated = 0.0;  // entropy-model pricing of the symbols
  double bpp_estimated = 0.0;
  double bpp_coded = 0.0;  // 8 * file bytes / (image h * w)
};

struct DecompressResult {
  ImageF image;  // fused output when side information is given, else x_dec
  ImageF x_dec;  // plain decoded image, always present
  double bpp_coded = 0.0;
};

// Encodes x with the model and writes the container. `model_hash` is the
// digest of the checkpoint file the model was loaded from.
CompressResult CompressFile(const ModelBundle& model,
                            const Sha256Digest& model_hash, const ImageF& x,
                            const std::string& out_path);

// Reads and checks the container, entropy-decodes the latent, and decodes
// the image. A hash mismatch against `expected_hash` is refused. When `si`
// is non-null it is passed through the codec, matched against the decoded
// image, and fused into the final output.
DecompressResult DecompressFile(const ModelBundle& model,
                                const Sha256Digest& expected_hash,
                                const std::string& in_path, const ImageF* si);

// Header-only read, for inspecting streams without a model.
DsinHeader ReadDsinHeader(const std::string& path);

}  // namespace dsin

#endif  // DSIN_CONTAINER_H_
