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

// Fusion network: X_dec and the synthetic side image are concatenated and
// refined by a stack of 3x3 convolutions whose dilation rates widen and then
// narrow again, growing the receptive field without extra downsampling. The
// final layer starts at zero so, with the residual connection, fusion is the
// identity on X_dec until training moves it.

#ifndef DSIN_SI_NET_H_
#define DSIN_SI_NET_H_

#include <vector>

#include "dsin/autodiff.h"

namespace dsin {

struct SiNetConfig {
  int width = 32;
  std::vector<int> dilations = {1, 2, 4, 8, 4, 2, 1};
  bool residual = true;
  double lrelu_slope = 0.2;

  void Validate() const {
    DSIN_REQUIRE(width >= 1, "SiNetConfig: width must be positive");
    DSIN_REQUIRE(!dilations.empty(), "SiNetConfig: empty dilation schedule");
    for (int d : dilations) {
      DSIN_REQUIRE(d >= 1, "SiNetConfig: dilations must be >= 1");
    }
  }
};

// One-sided receptive field growth of a 3x3 conv is its dilation, so the
// full field is 1 + 2*(sum of dilations) plus 2 for the output layer.
int SiNetReceptiveField(const SiNetConfig& cfg);

// Creates all fusion parameters ("si.*") in the store.
void InitSiNetParams(const SiNetConfig& cfg, ad::ParamStore& params, Rng& rng);

// x_dec and y_syn are {3,h,w} with identical dims; returns {3,h,w}.
ad::Var SiNetFuse(const SiNetConfig& cfg, const ad::ParamStore& params,
                  const ad::Var& x_dec, const ad::Var& y_syn);

}  // namespace dsin

#endif  // DSIN_SI_NET_H_
