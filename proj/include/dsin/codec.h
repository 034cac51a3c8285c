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

// Compressive auto-encoder: encoder E mapping an image to a real latent
// grid, nearest-center scalar quantization with learned centers, decoder D
// mapping the quantized grid back to an image, and a factorized per-channel
// categorical entropy model that prices the symbols.

#ifndef DSIN_CODEC_H_
#define DSIN_CODEC_H_

#include <string>
#include <vector>

#include "dsin/autodiff.h"
#include "dsin/image.h"

namespace dsin {

struct CodecConfig {
  int downsample_factor = 8;  // spatial reduction, one stride-2 stage per octave
  int latent_channels = 8;
  int num_centers = 6;
  int base_width = 32;
  double target_bpp = 0.15;
  double tau = 0.3;          // soft-assignment temperature for the train rate
  double prob_floor = 1e-9;  // minimum symbol probability

  void Validate() const {
    DSIN_REQUIRE(downsample_factor >= 2 &&
                     (downsample_factor & (downsample_factor - 1)) == 0,
                 "CodecConfig: downsample_factor must be a power of 2");
    DSIN_REQUIRE(latent_channels >= 1, "CodecConfig: latent_channels >= 1");
    DSIN_REQUIRE(num_centers >= 2, "CodecConfig: num_centers >= 2");
    DSIN_REQUIRE(base_width >= 1, "CodecConfig: base_width >= 1");
    DSIN_REQUIRE(target_bpp > 0.0, "CodecConfig: target_bpp must be > 0");
    DSIN_REQUIRE(tau > 0.0, "CodecConfig: tau must be > 0");
    DSIN_REQUIRE(prob_floor > 0.0 && prob_floor < 1.0,
                 "CodecConfig: prob_floor in (0,1)");
  }

  int NumStages() const {
    int n = 0, f = downsample_factor;
    while (f > 1) {
      f >>= 1;
      ++n;
    }
    return n;
  }
};

// Quantized latent: symbol indices and the equal-shaped center values, in
// channel-major, row, column order, plus the original image dims the grid
// was produced from (before any internal padding).
struct LatentGrid {
  int c = 0, h = 0, w = 0;
  int orig_h = 0, orig_w = 0;
  std::vector<int> symbols;
  std::vector<double> values;

  int64_t Count() const { return static_cast<int64_t>(c) * h * w; }
};

// Factorized categorical model: one distribution over the L centers per
// latent channel. Probabilities are softmax(logits) floored at prob_floor,
// strictly positive and summing to 1 up to num_centers * prob_floor.
struct EntropyModel {
  int channels = 0;
  int num_centers = 0;
  Tensor logits;  // {channels, num_centers}
  double prob_floor = 1e-9;

  std::vector<double> ChannelProbs(int ch) const;
};

// Creates encoder/decoder/quantizer/entropy parameters ("enc.*", "dec.*",
// "quant.centers", "entropy.logits") in the store. Centers start evenly
// spaced over [-2, 2]; logits start uniform.
void InitCodecParams(const CodecConfig& cfg, ad::ParamStore& params, Rng& rng);

// x must be {3,H,W} with H, W divisible by downsample_factor and free of
// NaNs. Returns the real latent {c, H/f, W/f}.
ad::Var CodecEncode(const CodecConfig& cfg, const ad::ParamStore& params,
                    const ad::Var& x);

// z {c,h,w} -> image tensor {3, h*f, w*f}. Output is unclamped; evaluation
// paths clamp to [0,1] via ClampUnit on the image.
ad::Var CodecDecode(const CodecConfig& cfg, const ad::ParamStore& params,
                    const ad::Var& z);

// Centers must be sorted ascending and strictly distinct. Ties between two
// equidistant centers resolve to the lower index.
void ValidateCenters(const std::vector<double>& centers);
int NearestCenter(double v, const std::vector<double>& centers);

// Value-level quantization of a real latent tensor.
LatentGrid Quantize(const Tensor& z, const std::vector<double>& centers,
                    int orig_h, int orig_w);

struct RateReport {
  double bits = 0.0;
  double bpp = 0.0;
};

// bits = sum of -log2 p(symbol); bpp divides by the ORIGINAL h*w stored in
// the grid, not the padded size.
RateReport Rate(const LatentGrid& grid, const EntropyModel& em);

// Convenience snapshots of the learned quantizer/entropy state.
std::vector<double> CentersFrom(const ad::ParamStore& params);
EntropyModel EntropyModelFrom(const CodecConfig& cfg,
                              const ad::ParamStore& params);

// Whole-pipeline helper used by the file codec and evaluation: pads the
// input to a multiple of the downsample factor, runs E, quantizes, and
// reports the grid (with original dims) without building gradient state.
LatentGrid EncodeImage(const CodecConfig& cfg, const ad::ParamStore& params,
                       const ImageF& x);

// Decodes a grid back to an image cropped to the grid's original dims,
// clamped to [0,1].
ImageF DecodeImage(const CodecConfig& cfg, const ad::ParamStore& params,
                   const LatentGrid& grid);

}  // namespace dsin

#endif  // DSIN_CODEC_H_
