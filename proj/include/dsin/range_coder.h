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

// Byte-oriented range coder in the carry-counting style used by LZMA:
// a 64-bit low accumulator whose carries are resolved through a cached
// byte plus a run counter, a 32-bit range renormalized below 2^24, and a
// 5-byte flush. The encoder and decoder renormalize in lockstep, so a
// truncated payload surfaces as an out-of-bytes read, never as garbage.
//
// SymbolCodec layers quantized frequency tables on top: probabilities are
// scaled to integers summing to exactly 2^16 (every symbol keeps at least
// count 1, remainders distributed largest-first, ties to the lower index).

#ifndef DSIN_RANGE_CODER_H_
#define DSIN_RANGE_CODER_H_

#include <cstdint>
#include <vector>

#include "dsin/base.h"

namespace dsin {

inline constexpr uint32_t kFreqTotal = 1u << 16;

class RangeEncoder {
 public:
  // Narrows the interval to [cum, cum+freq) out of total; total must divide
  // the current range without collapsing it (total <= 2^16 guarantees it).
  void Encode(uint32_t cum, uint32_t freq, uint32_t total);
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t len);
  // Returns the scaled offset used to pick a symbol; throws
  // CorruptStreamError if it falls outside [0, total).
  uint32_t DecodeFreq(uint32_t total);
  // Consumes the symbol chosen from the offset above.
  void Decode(uint32_t cum, uint32_t freq);

 private:
  uint8_t ReadByte();
  const uint8_t* data_;
  size_t len_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Integer frequency table summing to exactly kFreqTotal; probs must be
// strictly positive (>= floor) and are normalized internally.
std::vector<uint32_t> QuantizeFreqs(const std::vector<double>& probs,
                                    double floor);

// Symbol-level coder over a fixed set of categorical distributions; each
// position i of a sequence uses distribution dist_ids[i].
class SymbolCodec {
 public:
  SymbolCodec(const std::vector<std::vector<double>>& dists, double prob_floor);

  // Empty input produces an empty payload.
  std::vector<uint8_t> EncodeSymbols(const std::vector<int>& symbols,
                                     const std::vector<int>& dist_ids) const;
  std::vector<int> DecodeSymbols(const std::vector<uint8_t>& payload,
                                 const std::vector<int>& dist_ids) const;

  // Exact information content of a sequence under the quantized tables.
  double CrossEntropyBits(const std::vector<int>& symbols,
                          const std::vector<int>& dist_ids) const;

 private:
  struct Table {
    std::vector<uint32_t> freq;
    std::vector<uint32_t> cum;  // size L+1, cum[L] == kFreqTotal
  };
  const Table& TableFor(int id) const;
  std::vector<Table> tables_;
};

}  // namespace dsin

#endif  // DSIN_RANGE_CODER_H_
