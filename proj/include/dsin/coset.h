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

// Modulo coset coding of bounded integer pixels against decoder-side
// side information. The encoder transmits x mod M; the decoder picks the
// coset element nearest its correlated pixel y. Recovery is exact whenever
// |x - y| <= delta and 2*delta < M.

#ifndef DSIN_COSET_H_
#define DSIN_COSET_H_

#include <cstdint>

#include "dsin/base.h"
#include "dsin/image.h"

namespace dsin {

struct CosetConfig {
  int modulus = 8;            // M, number of cosets
  int alphabet_max = 255;     // inclusive max pixel value
  int correlation_bound = 3;  // delta, promised |x - y| <= delta

  void Validate() const {
    DSIN_REQUIRE(modulus >= 2, "CosetConfig: modulus must be >= 2");
    DSIN_REQUIRE(correlation_bound >= 0,
                 "CosetConfig: correlation bound must be >= 0");
    DSIN_REQUIRE(2 * correlation_bound < modulus,
                 "CosetConfig: need 2*delta < M for unique decoding");
    DSIN_REQUIRE(alphabet_max >= modulus - 1,
                 "CosetConfig: alphabet smaller than one coset period");
  }
};

// Bits needed per transmitted symbol: ceil(log2 M).
int CosetSymbolBits(const CosetConfig& cfg);

int CosetEncode(int x, const CosetConfig& cfg);

// Returns the element of {s, s+M, s+2M, ...} within [0, alphabet_max]
// nearest to y; distance ties resolve to the smaller element.
int CosetDecode(int symbol, int y, const CosetConfig& cfg);

// Elementwise lifts. Channels are processed independently; inputs must have
// identical shape. Total bit cost is h*w*c*CosetSymbolBits(cfg).
ImageU8 CosetEncodeImage(const ImageU8& img, const CosetConfig& cfg);
ImageU8 CosetDecodeImage(const ImageU8& symbols, const ImageU8& side_info,
                         const CosetConfig& cfg);
int64_t CosetImageBits(const ImageU8& img, const CosetConfig& cfg);

}  // namespace dsin

#endif  // DSIN_COSET_H_
