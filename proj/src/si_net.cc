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

#include "dsin/si_net.h"

#include <cmath>
#include <string>

namespace dsin {

namespace {

std::string LayerName(int i, const char* leaf) {
  return "si.l" + std::to_string(i) + "." + leaf;
}

Tensor HeInit(std::vector<int> shape, Rng& rng) {
  const int fan_in = shape[1] * shape[2] * shape[3];
  return Tensor::Randn(std::move(shape), rng, std::sqrt(2.0 / fan_in));
}

}  // namespace

int SiNetReceptiveField(const SiNetConfig& cfg) {
  cfg.Validate();
  int sum = 0;
  for (int d : cfg.dilations) sum += d;
  return 1 + 2 * sum + 2;
}

void InitSiNetParams(const SiNetConfig& cfg, ad::ParamStore& params, Rng& rng) {
  cfg.Validate();
  int cin = 6;
  for (size_t i = 0; i < cfg.dilations.size(); ++i) {
    params.Create(LayerName(static_cast<int>(i), "w"),
                  HeInit({cfg.width, cin, 3, 3}, rng));
    params.Create(LayerName(static_cast<int>(i), "b"), Tensor({cfg.width}));
    cin = cfg.width;
  }
  params.Create("si.head.w", Tensor({3, cfg.width, 3, 3}));
  params.Create("si.head.b", Tensor({3}));
}

ad::Var SiNetFuse(const SiNetConfig& cfg, const ad::ParamStore& params,
                  const ad::Var& x_dec, const ad::Var& y_syn) {
  cfg.Validate();
  DSIN_REQUIRE(x_dec->value.shape.size() == 3 &&
                   x_dec->value.shape[0] == 3 &&
                   x_dec->value.SameShape(y_syn->value),
               "SiNetFuse: inputs must be matching {3,h,w} maps");
  ad::Var h = ad::ConcatC(x_dec, y_syn);
  for (size_t i = 0; i < cfg.dilations.size(); ++i) {
    const int d = cfg.dilations[i];
    h = ad::Conv2d(h, params.Get(LayerName(static_cast<int>(i), "w")),
                   params.Get(LayerName(static_cast<int>(i), "b")), 1, d, d);
    h = ad::LeakyRelu(h, cfg.lrelu_slope);
  }
  ad::Var correction =
      ad::Conv2d(h, params.Get("si.head.w"), params.Get("si.head.b"), 1, 1, 1);
  return cfg.residual ? ad::Add(x_dec, correction) : correction;
}

}  // namespace dsin
