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

#include "dsin/codec.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace dsin {

namespace {

constexpr double kLreluSlope = 0.2;

std::string StageBase(const char* side, int i) {
  return std::string(side) + ".s" + std::to_string(i);
}

std::string StageName(const char* side, int i, const char* leaf) {
  return StageBase(side, i) + "." + leaf;
}

Tensor HeInit(std::vector<int> shape, Rng& rng) {
  const int fan_in = shape[1] * shape[2] * shape[3];
  return Tensor::Randn(std::move(shape), rng, std::sqrt(2.0 / fan_in));
}

void CreateConv(ad::ParamStore& params, const std::string& prefix, int cout,
                int cin, Rng& rng) {
  params.Create(prefix + ".w", HeInit({cout, cin, 3, 3}, rng));
  params.Create(prefix + ".b", Tensor({cout}));
}

ad::Var ConvLayer(const ad::ParamStore& params, const std::string& prefix,
                  const ad::Var& x, int stride) {
  return ad::Conv2d(x, params.Get(prefix + ".w"), params.Get(prefix + ".b"),
                    stride, 1, 1);
}

// Post-activation residual unit: x + conv(lrelu(conv(x))), then lrelu.
ad::Var ResBlock(const ad::ParamStore& params, const std::string& prefix,
                 const ad::Var& x) {
  ad::Var t = ad::LeakyRelu(ConvLayer(params, prefix + ".r1", x, 1), kLreluSlope);
  t = ConvLayer(params, prefix + ".r2", t, 1);
  return ad::LeakyRelu(ad::Add(x, t), kLreluSlope);
}

void CheckFinite(const Tensor& t, const char* what) {
  for (double v : t.v) {
    DSIN_REQUIRE(std::isfinite(v), std::string(what) + ": non-finite input");
  }
}

}  // namespace

std::vector<double> EntropyModel::ChannelProbs(int ch) const {
  DSIN_REQUIRE(ch >= 0 && ch < channels, "EntropyModel: channel out of range");
  std::vector<double> p(num_centers);
  const double* lg = logits.data() + static_cast<int64_t>(ch) * num_centers;
  double mx = -1e300;
  for (int k = 0; k < num_centers; ++k) mx = std::max(mx, lg[k]);
  double sum = 0.0;
  for (int k = 0; k < num_centers; ++k) {
    p[k] = std::exp(lg[k] - mx);
    sum += p[k];
  }
  for (int k = 0; k < num_centers; ++k) {
    p[k] = std::max(p[k] / sum, prob_floor);
  }
  return p;
}

void InitCodecParams(const CodecConfig& cfg, ad::ParamStore& params, Rng& rng) {
  cfg.Validate();
  const int w = cfg.base_width;
  CreateConv(params, "enc.stem", w, 3, rng);
  for (int i = 0; i < cfg.NumStages(); ++i) {
    CreateConv(params, StageName("enc", i, "down"), w, w, rng);
    CreateConv(params, StageName("enc", i, "r1"), w, w, rng);
    CreateConv(params, StageName("enc", i, "r2"), w, w, rng);
  }
  CreateConv(params, "enc.head", cfg.latent_channels, w, rng);

  CreateConv(params, "dec.stem", w, cfg.latent_channels, rng);
  for (int i = 0; i < cfg.NumStages(); ++i) {
    CreateConv(params, StageName("dec", i, "up"), w, w, rng);
    CreateConv(params, StageName("dec", i, "r1"), w, w, rng);
    CreateConv(params, StageName("dec", i, "r2"), w, w, rng);
  }
  CreateConv(params, "dec.head", 3, w, rng);

  Tensor centers({cfg.num_centers});
  for (int k = 0; k < cfg.num_centers; ++k) {
    centers.v[k] = -2.0 + 4.0 * k / (cfg.num_centers - 1);
  }
  params.Create("quant.centers", centers);
  params.Create("entropy.logits", Tensor({cfg.latent_channels, cfg.num_centers}));
}

ad::Var CodecEncode(const CodecConfig& cfg, const ad::ParamStore& params,
                    const ad::Var& x) {
  cfg.Validate();
  DSIN_REQUIRE(x->value.shape.size() == 3 && x->value.shape[0] == 3,
               "CodecEncode: input must be {3,H,W}");
  DSIN_REQUIRE(x->value.shape[1] % cfg.downsample_factor == 0 &&
                   x->value.shape[2] % cfg.downsample_factor == 0,
               "CodecEncode: dims must be padded to the downsample factor");
  CheckFinite(x->value, "CodecEncode");
  ad::Var h = ad::LeakyRelu(ConvLayer(params, "enc.stem", x, 1), kLreluSlope);
  for (int i = 0; i < cfg.NumStages(); ++i) {
    h = ad::LeakyRelu(ConvLayer(params, StageName("enc", i, "down"), h, 2),
                      kLreluSlope);
    h = ResBlock(params, StageBase("enc", i), h);
  }
  return ConvLayer(params, "enc.head", h, 1);
}

ad::Var CodecDecode(const CodecConfig& cfg, const ad::ParamStore& params,
                    const ad::Var& z) {
  cfg.Validate();
  DSIN_REQUIRE(z->value.shape.size() == 3 &&
                   z->value.shape[0] == cfg.latent_channels,
               "CodecDecode: latent must be {c,h,w}");
  ad::Var h = ad::LeakyRelu(ConvLayer(params, "dec.stem", z, 1), kLreluSlope);
  for (int i = 0; i < cfg.NumStages(); ++i) {
    h = ad::UpsampleNearest2(h);
    h = ad::LeakyRelu(ConvLayer(params, StageName("dec", i, "up"), h, 1),
                      kLreluSlope);
    h = ResBlock(params, StageBase("dec", i), h);
  }
  return ConvLayer(params, "dec.head", h, 1);
}

void ValidateCenters(const std::vector<double>& centers) {
  DSIN_REQUIRE(centers.size() >= 2, "centers: need at least two");
  for (size_t k = 1; k < centers.size(); ++k) {
    DSIN_REQUIRE(centers[k] > centers[k - 1],
                 "centers: must be sorted ascending and distinct");
  }
}

int NearestCenter(double v, const std::vector<double>& centers) {
  int best = 0;
  double best_d = std::abs(v - centers[0]);
  for (size_t k = 1; k < centers.size(); ++k) {
    const double dk = std::abs(v - centers[k]);
    if (dk < best_d) {
      best_d = dk;
      best = static_cast<int>(k);
    }
  }
  return best;
}

LatentGrid Quantize(const Tensor& z, const std::vector<double>& centers,
                    int orig_h, int orig_w) {
  DSIN_REQUIRE(z.shape.size() == 3, "Quantize: latent must be {c,h,w}");
  ValidateCenters(centers);
  LatentGrid grid;
  grid.c = z.shape[0];
  grid.h = z.shape[1];
  grid.w = z.shape[2];
  grid.orig_h = orig_h;
  grid.orig_w = orig_w;
  grid.symbols.resize(z.size());
  grid.values.resize(z.size());
  for (int64_t i = 0; i < z.size(); ++i) {
    const int s = NearestCenter(z.v[i], centers);
    grid.symbols[i] = s;
    grid.values[i] = centers[s];
  }
  return grid;
}

RateReport Rate(const LatentGrid& grid, const EntropyModel& em) {
  DSIN_REQUIRE(grid.c == em.channels, "Rate: channel count mismatch");
  DSIN_REQUIRE(grid.orig_h > 0 && grid.orig_w > 0, "Rate: missing image dims");
  RateReport rep;
  const int64_t plane = static_cast<int64_t>(grid.h) * grid.w;
  for (int ch = 0; ch < grid.c; ++ch) {
    const std::vector<double> p = em.ChannelProbs(ch);
    for (int64_t i = 0; i < plane; ++i) {
      const int s = grid.symbols[ch * plane + i];
      DSIN_REQUIRE(s >= 0 && s < em.num_centers, "Rate: symbol out of range");
      rep.bits += -std::log2(p[s]);
    }
  }
  rep.bpp = rep.bits / (static_cast<double>(grid.orig_h) * grid.orig_w);
  return rep;
}

std::vector<double> CentersFrom(const ad::ParamStore& params) {
  const Tensor& t = params.Get("quant.centers")->value;
  std::vector<double> centers = t.v;
  ValidateCenters(centers);
  return centers;
}

EntropyModel EntropyModelFrom(const CodecConfig& cfg,
                              const ad::ParamStore& params) {
  EntropyModel em;
  em.channels = cfg.latent_channels;
  em.num_centers = cfg.num_centers;
  em.logits = params.Get("entropy.logits")->value;
  em.prob_floor = cfg.prob_floor;
  return em;
}

LatentGrid EncodeImage(const CodecConfig& cfg, const ad::ParamStore& params,
                       const ImageF& x) {
  DSIN_REQUIRE(x.c == 3, "EncodeImage: expects a 3-channel image");
  ImageF padded = PadToMultiple(x, cfg.downsample_factor);
  ad::NoGradGuard guard;
  ad::Var z = CodecEncode(cfg, params, ad::Constant(FromImage(padded)));
  return Quantize(z->value, CentersFrom(params), x.h, x.w);
}

ImageF DecodeImage(const CodecConfig& cfg, const ad::ParamStore& params,
                   const LatentGrid& grid) {
  DSIN_REQUIRE(grid.c == cfg.latent_channels, "DecodeImage: channel mismatch");
  DSIN_REQUIRE(grid.h * cfg.downsample_factor >= grid.orig_h &&
                   grid.w * cfg.downsample_factor >= grid.orig_w,
               "DecodeImage: grid too small for recorded dims");
  Tensor z({grid.c, grid.h, grid.w});
  z.v = grid.values;
  ad::NoGradGuard guard;
  ad::Var x = CodecDecode(cfg, params, ad::Constant(z));
  ImageF img = ToImage(x->value);
  return ClampUnit(CropTo(img, grid.orig_h, grid.orig_w));
}

}  // namespace dsin
