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

// One aggregate config covering model, matcher, data and optimization,
// with JSON round-tripping for files and CLI overrides.

#ifndef DSIN_RUN_CONFIG_H_
#define DSIN_RUN_CONFIG_H_

#include <cstdint>
#include <string>

#include "dsin/codec.h"
#include "dsin/si_finder.h"
#include "dsin/si_net.h"

namespace dsin {

struct LossWeights {
  // Weight on the fused reconstruction; (1 - alpha) goes to the plain
  // decoder output so its gradient path never collapses.
  double alpha = 0.7;
  // Weight on the hinge rate penalty max(bpp - target, 0).
  double beta = 100.0;
  std::string distortion = "l1";

  void Validate() const;
};

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 1;
  int iterations = 2000;
  uint64_t seed = 1;
  // "pretrain" optimizes codec-only terms; "joint" adds the fused output.
  std::string stage = "pretrain";
  int metrics_every = 1;
  // Centers keep at least this gap after every optimizer step.
  double center_min_gap = 1e-3;

  void Validate() const;
};

struct PairSpec {
  // "synthetic" generates correlated pairs; "stereo" takes same-time
  // opposite views; "general" pairs a frame with a later one.
  std::string mode = "synthetic";
  // Frame gap for general mode; 0 means every gap in {1, 2, 3}.
  int time_offset = 0;
  double translation_px = 6.0;
  double affine_jitter = 0.0;
  double photometric_gain = 0.1;
  double photometric_bias = 0.05;
  double occlusion_fraction = 0.05;
  double noise_sigma = 0.05;
  // Synthetic pairs are resampled until mean patch correlation lands here.
  double corr_lo = 0.85;
  double corr_hi = 0.98;
  int eval_h = 64;
  int eval_w = 96;

  void Validate() const;
};

struct RunConfig {
  CodecConfig codec;
  SiNetConfig si_net;
  MatcherConfig matcher;
  TrainConfig train;
  LossWeights loss;
  PairSpec data;

  void Validate() const;
};

// JSON text round trip. Parsing accepts any subset of the keys and leaves
// the rest at defaults; unknown keys are an error.
RunConfig RunConfigFromJsonText(const std::string& text);
std::string RunConfigToJsonText(const RunConfig& cfg);

RunConfig LoadRunConfig(const std::string& path);
void SaveRunConfig(const std::string& path, const RunConfig& cfg);

}  // namespace dsin

#endif  // DSIN_RUN_CONFIG_H_
