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

#include "dsin/range_coder.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsin {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    uint8_t temp = cache_;
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    do {
      out_.push_back(static_cast<uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(static_cast<uint32_t>(low_) >> 24);
  }
  ++cache_size_;
  low_ = (static_cast<uint32_t>(low_)) << 8;
  low_ &= 0xFFFFFFFFull;
}

void RangeEncoder::Encode(uint32_t cum, uint32_t freq, uint32_t total) {
  DSIN_REQUIRE(freq > 0 && total > 0 && cum + freq <= total &&
                   total <= kFreqTotal,
               "RangeEncoder: invalid interval");
  range_ /= total;
  low_ += static_cast<uint64_t>(cum) * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    range_ <<= 8;
    ShiftLow();
  }
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t len)
    : data_(data), len_(len) {
  // The first byte is the encoder's initial zero cache; it shifts out of
  // the 32-bit code as the next four bytes arrive.
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | ReadByte();
}

uint8_t RangeDecoder::ReadByte() {
  if (pos_ >= len_) {
    throw CorruptStreamError("range decoder: payload truncated");
  }
  return data_[pos_++];
}

uint32_t RangeDecoder::DecodeFreq(uint32_t total) {
  DSIN_REQUIRE(total > 0 && total <= kFreqTotal,
               "RangeDecoder: invalid total");
  range_ /= total;
  const uint32_t offset = code_ / range_;
  if (offset >= total) {
    throw CorruptStreamError("range decoder: offset outside model");
  }
  return offset;
}

void RangeDecoder::Decode(uint32_t cum, uint32_t freq) {
  code_ -= cum * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | ReadByte();
    range_ <<= 8;
  }
}

std::vector<uint32_t> QuantizeFreqs(const std::vector<double>& probs,
                                    double floor) {
  const size_t n = probs.size();
  DSIN_REQUIRE(n >= 1, "QuantizeFreqs: empty distribution");
  DSIN_REQUIRE(n <= kFreqTotal / 2, "QuantizeFreqs: too many symbols");
  double sum = 0.0;
  for (double p : probs) {
    DSIN_REQUIRE(p + 1e-15 >= floor,
                 "QuantizeFreqs: probability below the floor");
    sum += p;
  }
  const uint32_t budget = kFreqTotal - static_cast<uint32_t>(n);
  std::vector<uint32_t> freq(n);
  std::vector<double> remainder(n);
  uint32_t assigned = 0;
  for (size_t k = 0; k < n; ++k) {
    const double raw = probs[k] / sum * budget;
    const double fl = std::floor(raw);
    freq[k] = static_cast<uint32_t>(fl) + 1;
    remainder[k] = raw - fl;
    assigned += freq[k];
  }
  DSIN_CHECK(assigned <= kFreqTotal, "QuantizeFreqs: overflow");
  uint32_t leftover = kFreqTotal - assigned;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainder[a] > remainder[b];
  });
  for (size_t i = 0; i < leftover; ++i) ++freq[order[i % n]];
  DSIN_CHECK(std::accumulate(freq.begin(), freq.end(), uint64_t{0}) ==
                 kFreqTotal,
             "QuantizeFreqs: table does not sum to the total");
  return freq;
}

SymbolCodec::SymbolCodec(const std::vector<std::vector<double>>& dists,
                         double prob_floor) {
  DSIN_REQUIRE(!dists.empty(), "SymbolCodec: no distributions");
  tables_.reserve(dists.size());
  for (const auto& d : dists) {
    Table t;
    t.freq = QuantizeFreqs(d, prob_floor);
    t.cum.resize(t.freq.size() + 1, 0);
    for (size_t k = 0; k < t.freq.size(); ++k) {
      t.cum[k + 1] = t.cum[k] + t.freq[k];
    }
    tables_.push_back(std::move(t));
  }
}

const SymbolCodec::Table& SymbolCodec::TableFor(int id) const {
  DSIN_REQUIRE(id >= 0 && id < static_cast<int>(tables_.size()),
               "SymbolCodec: distribution id out of range");
  return tables_[id];
}

std::vector<uint8_t> SymbolCodec::EncodeSymbols(
    const std::vector<int>& symbols, const std::vector<int>& dist_ids) const {
  DSIN_REQUIRE(symbols.size() == dist_ids.size(),
               "SymbolCodec: ids must match symbols");
  if (symbols.empty()) return {};
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) {
    const Table& t = TableFor(dist_ids[i]);
    const int s = symbols[i];
    DSIN_REQUIRE(s >= 0 && s < static_cast<int>(t.freq.size()),
                 "SymbolCodec: symbol out of range");
    enc.Encode(t.cum[s], t.freq[s], kFreqTotal);
  }
  return enc.Finish();
}

std::vector<int> SymbolCodec::DecodeSymbols(
    const std::vector<uint8_t>& payload,
    const std::vector<int>& dist_ids) const {
  if (dist_ids.empty()) return {};
  RangeDecoder dec(payload.data(), payload.size());
  std::vector<int> symbols(dist_ids.size());
  for (size_t i = 0; i < dist_ids.size(); ++i) {
    const Table& t = TableFor(dist_ids[i]);
    const uint32_t offset = dec.DecodeFreq(kFreqTotal);
    // Last k with cum[k] <= offset.
    const int s = static_cast<int>(
        std::upper_bound(t.cum.begin(), t.cum.end(), offset) -
        t.cum.begin() - 1);
    symbols[i] = s;
    dec.Decode(t.cum[s], t.freq[s]);
  }
  return symbols;
}

double SymbolCodec::CrossEntropyBits(const std::vector<int>& symbols,
                                     const std::vector<int>& dist_ids) const {
  DSIN_REQUIRE(symbols.size() == dist_ids.size(),
               "SymbolCodec: ids must match symbols");
  double bits = 0.0;
  for (size_t i = 0; i < symbols.size(); ++i) {
    const Table& t = TableFor(dist_ids[i]);
    bits += -std::log2(static_cast<double>(t.freq[symbols[i]]) / kFreqTotal);
  }
  return bits;
}

}  // namespace dsin
