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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "dsin/base.h"
#include "dsin/codec.h"
#include "dsin/tensor.h"
#include "test_util.h"

namespace dsin {
namespace {

CodecConfig SmallCodec() {
  CodecConfig cfg;
  cfg.downsample_factor = 4;
  cfg.latent_channels = 2;
  cfg.num_centers = 6;
  cfg.base_width = 6;
  return cfg;
}

TEST_CASE("codec init creates the expected parameters") {
  CodecConfig cfg = SmallCodec();
  ad::ParamStore params;
  Rng rng(3);
  InitCodecParams(cfg, params, rng);

  for (const char* name :
       {"enc.stem.w", "enc.s0.down.w", "enc.s0.r1.w", "enc.s0.r2.w",
        "enc.s1.down.w", "enc.head.w", "dec.stem.w", "dec.s0.up.w",
        "dec.s0.r1.w", "dec.s1.r2.w", "dec.head.w", "quant.centers",
        "entropy.logits"}) {
    CHECK(params.Has(name));
  }

  const Tensor& centers = params.Get("quant.centers")->value;
  REQUIRE(centers.size() == 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(centers.v[k] == doctest::Approx(-2.0 + 4.0 * k / 5.0).epsilon(1e-12));
  }
  const Tensor& logits = params.Get("entropy.logits")->value;
  CHECK(logits.shape == std::vector<int>{2, 6});
  for (double v : logits.v) CHECK(v == 0.0);
}

TEST_CASE("same seed initializes identical codec weights") {
  CodecConfig cfg = SmallCodec();
  ad::ParamStore a, b, c;
  Rng ra(7), rb(7), rc(8);
  InitCodecParams(cfg, a, ra);
  InitCodecParams(cfg, b, rb);
  InitCodecParams(cfg, c, rc);
  CHECK(a.Snapshot() == b.Snapshot());
  CHECK(a.Snapshot() != c.Snapshot());
}

TEST_CASE("encode and decode produce mirrored shapes") {
  CodecConfig cfg = SmallCodec();
  ad::ParamStore params;
  Rng rng(5);
  InitCodecParams(cfg, params, rng);

  ad::NoGradGuard guard;
  Tensor x = testutil::RandTensor({3, 16, 24}, rng);
  ad::Var z = CodecEncode(cfg, params, ad::Constant(x));
  CHECK(z->value.shape == std::vector<int>{2, 4, 6});
  ad::Var back = CodecDecode(cfg, params, z);
  CHECK(back->value.shape == std::vector<int>{3, 16, 24});

  CHECK_THROWS_AS(
      CodecEncode(cfg, params, ad::Constant(testutil::RandTensor({3, 15, 24}, rng))),
      DomainError);
}

TEST_CASE("nearest-center quantization resolves ties to the lower index") {
  const std::vector<double> centers = {-1.0, 1.0};
  CHECK(NearestCenter(0.0, centers) == 0);
  CHECK(NearestCenter(1e-6, centers) == 1);
  CHECK(NearestCenter(-3.0, centers) == 0);
  CHECK(NearestCenter(3.0, centers) == 1);
}

TEST_CASE("quantize records consistent symbols and values") {
  Tensor z({2, 2, 3});
  const std::vector<double> centers = {-1.0, 0.0, 0.5, 2.0};
  Rng rng(9);
  for (double& v : z.v) v = rng.Normal() * 2.0;
  const LatentGrid grid = Quantize(z, centers, 7, 11);
  CHECK(grid.c == 2);
  CHECK(grid.h == 2);
  CHECK(grid.w == 3);
  CHECK(grid.orig_h == 7);
  CHECK(grid.orig_w == 11);
  CHECK(grid.Count() == 12);
  for (int64_t i = 0; i < 12; ++i) {
    const int s = grid.symbols[i];
    CHECK(grid.values[i] == centers[s]);
    for (size_t k = 0; k < centers.size(); ++k) {
      CHECK(std::abs(z.v[i] - centers[s]) <=
            std::abs(z.v[i] - centers[k]) + 1e-15);
    }
  }
}

TEST_CASE("center validation rejects unsorted or duplicate centers") {
  CHECK_THROWS_AS(ValidateCenters({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(ValidateCenters({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(ValidateCenters({0.0}), DomainError);
  CHECK_NOTHROW(ValidateCenters({-1.0, 0.25, 3.0}));
}

TEST_CASE("entropy model probabilities are floored softmax values") {
  EntropyModel em;
  em.channels = 2;
  em.num_centers = 4;
  em.logits = Tensor({2, 4});
  em.prob_floor = 1e-9;

  const std::vector<double> uniform = em.ChannelProbs(0);
  for (double p : uniform) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

  em.logits.v = {0.0, 0.0, 0.0, 60.0, 1.0, -2.0, 0.5, 0.0};
  const std::vector<double> skewed = em.ChannelProbs(0);
  CHECK(skewed[0] == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(skewed[3] == doctest::Approx(1.0).epsilon(1e-9));
  double sum = 0.0;
  for (double p : skewed) {
    CHECK(p >= 1e-9);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(em.ChannelProbs(2), DomainError);
}

TEST_CASE("uniform eight-center model prices three bits per symbol") {
  EntropyModel em;
  em.channels = 1;
  em.num_centers = 8;
  em.logits = Tensor({1, 8});
  em.prob_floor = 1e-9;

  LatentGrid grid;
  grid.c = 1;
  grid.h = 4;
  grid.w = 5;
  grid.orig_h = 13;
  grid.orig_w = 11;
  grid.symbols.assign(20, 0);
  Rng rng(17);
  for (int& s : grid.symbols) s = static_cast<int>(rng.Below(8));
  grid.values.assign(20, 0.0);

  const RateReport rep = Rate(grid, em);
  CHECK(rep.bits == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(rep.bpp == doctest::Approx(60.0 / (13.0 * 11.0)).epsilon(1e-12));
}

TEST_CASE("rate matches a from-definition recomputation") {
  Rng rng(23);
  EntropyModel em;
  em.channels = 3;
  em.num_centers = 5;
  em.logits = Tensor({3, 5});
  em.prob_floor = 1e-9;
  for (double& v : em.logits.v) v = rng.Normal();

  LatentGrid grid;
  grid.c = 3;
  grid.h = 6;
  grid.w = 4;
  grid.orig_h = 40;
  grid.orig_w = 30;
  grid.symbols.resize(grid.Count());
  grid.values.assign(grid.Count(), 0.0);
  for (int& s : grid.symbols) s = static_cast<int>(rng.Below(5));

  double want = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    double mx = -1e300, sum = 0.0;
    std::vector<double> p(5);
    for (int k = 0; k < 5; ++k) mx = std::max(mx, em.logits.v[ch * 5 + k]);
    for (int k = 0; k < 5; ++k) {
      p[k] = std::exp(em.logits.v[ch * 5 + k] - mx);
      sum += p[k];
    }
    for (int k = 0; k < 5; ++k) p[k] = std::max(p[k] / sum, 1e-9);
    for (int i = 0; i < 24; ++i) {
      want += -std::log2(p[grid.symbols[ch * 24 + i]]);
    }
  }
  const RateReport rep = Rate(grid, em);
  CHECK(rep.bits == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("image encode and decode handle non-multiple dims") {
  CodecConfig cfg = SmallCodec();
  ad::ParamStore params;
  Rng rng(31);
  InitCodecParams(cfg, params, rng);

  const ImageF x = testutil::RandImage(13, 18, 3, rng);
  const LatentGrid grid = EncodeImage(cfg, params, x);
  CHECK(grid.c == 2);
  CHECK(grid.h == 4);  // padded to 16
  CHECK(grid.w == 5);  // padded to 20
  CHECK(grid.orig_h == 13);
  CHECK(grid.orig_w == 18);

  const ImageF back = DecodeImage(cfg, params, grid);
  CHECK(back.h == 13);
  CHECK(back.w == 18);
  CHECK(back.c == 3);
  for (double v : back.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("encode-image leaves no gradient state behind") {
  CodecConfig cfg = SmallCodec();
  ad::ParamStore params;
  Rng rng(37);
  InitCodecParams(cfg, params, rng);
  const ImageF x = testutil::RandImage(8, 8, 3, rng);
  (void)EncodeImage(cfg, params, x);
  for (const std::string& name : params.Names()) {
    CHECK(params.Get(name)->grad.v.empty());
  }
}

}  // namespace
}  // namespace dsin
