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

#include "dsin/coset.h"

#include <cmath>
#include <cstdlib>

namespace dsin {

int CosetSymbolBits(const CosetConfig& cfg) {
  cfg.Validate();
  int bits = 0;
  while ((1 << bits) < cfg.modulus) ++bits;
  return bits;
}

int CosetEncode(int x, const CosetConfig& cfg) {
  cfg.Validate();
  DSIN_REQUIRE(x >= 0 && x <= cfg.alphabet_max,
               "CosetEncode: value outside [0, alphabet_max]");
  return x % cfg.modulus;
}

int CosetDecode(int symbol, int y, const CosetConfig& cfg) {
  cfg.Validate();
  DSIN_REQUIRE(symbol >= 0 && symbol < cfg.modulus,
               "CosetDecode: symbol outside [0, M)");
  DSIN_REQUIRE(y >= 0 && y <= cfg.alphabet_max,
               "CosetDecode: side info outside [0, alphabet_max]");
  const int m = cfg.modulus;
  // Candidate nearest y, then its neighbours one period away. Scanning the
  // smaller candidate first makes distance ties pick the smaller element.
  int base = (y / m) * m + symbol;
  int best = -1;
  int best_dist = 0;
  for (int cand : {base - m, base, base + m}) {
    if (cand < 0 || cand > cfg.alphabet_max) continue;
    int dist = std::abs(cand - y);
    if (best < 0 || dist < best_dist) {
      best = cand;
      best_dist = dist;
    }
  }
  DSIN_CHECK(best >= 0, "CosetDecode: no coset element inside alphabet");
  return best;
}

ImageU8 CosetEncodeImage(const ImageU8& img, const CosetConfig& cfg) {
  cfg.Validate();
  ImageU8 out(img.h, img.w, img.c);
  for (size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<uint8_t>(CosetEncode(img.data[i], cfg));
  }
  return out;
}

ImageU8 CosetDecodeImage(const ImageU8& symbols, const ImageU8& side_info,
                         const CosetConfig& cfg) {
  cfg.Validate();
  DSIN_REQUIRE(symbols.h == side_info.h && symbols.w == side_info.w &&
                   symbols.c == side_info.c,
               "CosetDecodeImage: shape mismatch");
  ImageU8 out(symbols.h, symbols.w, symbols.c);
  for (size_t i = 0; i < symbols.data.size(); ++i) {
    out.data[i] =
        static_cast<uint8_t>(CosetDecode(symbols.data[i], side_info.data[i], cfg));
  }
  return out;
}

int64_t CosetImageBits(const ImageU8& img, const CosetConfig& cfg) {
  return static_cast<int64_t>(img.h) * img.w * img.c * CosetSymbolBits(cfg);
}

}  // namespace dsin
