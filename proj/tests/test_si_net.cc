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
#include "dsin/si_net.h"
#include "dsin/tensor.h"
#include "test_util.h"

namespace dsin {
namespace {

SiNetConfig SmallNet() {
  SiNetConfig cfg;
  cfg.width = 5;
  cfg.dilations = {1, 2, 1};
  return cfg;
}

TEST_CASE("receptive field follows the dilation schedule") {
  SiNetConfig cfg;
  cfg.dilations = {1, 2, 4, 8, 4, 2, 1};
  CHECK(SiNetReceptiveField(cfg) == 47);
  cfg.dilations = {1, 2, 4, 2, 1};
  CHECK(SiNetReceptiveField(cfg) == 23);
  cfg.dilations = {1};
  CHECK(SiNetReceptiveField(cfg) == 5);
}

TEST_CASE("fusion is the identity at initialization") {
  SiNetConfig cfg = SmallNet();
  ad::ParamStore params;
  Rng rng(3);
  InitSiNetParams(cfg, params, rng);

  ad::NoGradGuard guard;
  Tensor x = testutil::RandTensor({3, 10, 12}, rng);
  Tensor y = testutil::RandTensor({3, 10, 12}, rng);
  ad::Var out = SiNetFuse(cfg, params, ad::Constant(x), ad::Constant(y));
  REQUIRE(out->value.shape == x.shape);
  for (int64_t i = 0; i < x.size(); ++i) {
    CHECK(out->value.v[i] == x.v[i]);
  }
}

TEST_CASE("perturbing the output layer breaks the identity") {
  SiNetConfig cfg = SmallNet();
  ad::ParamStore params;
  Rng rng(5);
  InitSiNetParams(cfg, params, rng);
  params.Get("si.head.b")->value.v[0] = 0.25;

  ad::NoGradGuard guard;
  Tensor x = testutil::RandTensor({3, 8, 8}, rng);
  Tensor y = testutil::RandTensor({3, 8, 8}, rng);
  ad::Var out = SiNetFuse(cfg, params, ad::Constant(x), ad::Constant(y));
  double max_dev = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(out->value.v[i] - x.v[i]));
  }
  CHECK(max_dev > 0.1);
}

TEST_CASE("without the residual connection the initial output is zero") {
  SiNetConfig cfg = SmallNet();
  cfg.residual = false;
  ad::ParamStore params;
  Rng rng(7);
  InitSiNetParams(cfg, params, rng);

  ad::NoGradGuard guard;
  Tensor x = testutil::RandTensor({3, 8, 10}, rng);
  Tensor y = testutil::RandTensor({3, 8, 10}, rng);
  ad::Var out = SiNetFuse(cfg, params, ad::Constant(x), ad::Constant(y));
  for (double v : out->value.v) CHECK(v == 0.0);
}

TEST_CASE("fusion output shifts with its inputs away from borders") {
  SiNetConfig cfg = SmallNet();
  ad::ParamStore params;
  Rng rng(11);
  InitSiNetParams(cfg, params, rng);
  // Random head so the net does real work.
  for (double& v : params.Get("si.head.w")->value.v) v = rng.Normal() * 0.3;

  const int rf = SiNetReceptiveField(cfg);  // 1 + 2*4 + 2 = 11
  const int h = 40, w = 44, dy = 3, dx = 5;
  const ImageF xi = testutil::RandImage(h, w, 3, rng);
  const ImageF yi = testutil::RandImage(h, w, 3, rng);

  ad::NoGradGuard guard;
  ad::Var base = SiNetFuse(cfg, params, ad::Constant(FromImage(xi)),
                           ad::Constant(FromImage(yi)));
  ad::Var moved = SiNetFuse(cfg, params, ad::Constant(FromImage(Roll(xi, dy, dx))),
                            ad::Constant(FromImage(Roll(yi, dy, dx))));

  const ImageF a = ToImage(base->value);
  const ImageF b = ToImage(moved->value);
  const int margin = rf + std::max(dy, dx);
  for (int c = 0; c < 3; ++c) {
    for (int yy = margin; yy < h - margin; ++yy) {
      for (int xx = margin; xx < w - margin; ++xx) {
        CHECK(std::abs(b.At(c, yy + dy, xx + dx) - a.At(c, yy, xx)) < 1e-9);
      }
    }
  }
}

TEST_CASE("fusion gradients match finite differences") {
  SiNetConfig cfg;
  cfg.width = 3;
  cfg.dilations = {1, 2};
  ad::ParamStore params;
  Rng rng(13);
  InitSiNetParams(cfg, params, rng);
  for (double& v : params.Get("si.head.w")->value.v) v = rng.Normal() * 0.2;

  Tensor x = testutil::RandTensor({3, 6, 7}, rng);
  Tensor y = testutil::RandTensor({3, 6, 7}, rng);
  Tensor probe = testutil::RandTensor({3, 6, 7}, rng);

  auto build = [&](std::vector<ad::Var>& v) {
    return ad::Inner(SiNetFuse(cfg, params, v[0], v[1]), probe);
  };
  CHECK(testutil::FdMaxRelError(build, {x, y}, 0) < 1e-5);
  CHECK(testutil::FdMaxRelError(build, {x, y}, 1) < 1e-5);

  auto build_loss = [&]() {
    return ad::Inner(SiNetFuse(cfg, params, ad::Constant(x), ad::Constant(y)),
                     probe);
  };
  CHECK(testutil::FdParamMaxRelError(params, build_loss, "si.l0.w", 40, rng) < 1e-5);
  CHECK(testutil::FdParamMaxRelError(params, build_loss, "si.l1.b", 40, rng) < 1e-5);
  CHECK(testutil::FdParamMaxRelError(params, build_loss, "si.head.w", 40, rng) < 1e-5);
}

}  // namespace
}  // namespace dsin
