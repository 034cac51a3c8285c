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

// Two-stage optimization: codec pretraining on rate + distortion, then
// joint training where the side-information path refines the decode. The
// side image payload never receives gradient; it only shapes the fused
// reconstruction through the synthesized reference.

#ifndef DSIN_TRAINING_H_
#define DSIN_TRAINING_H_

#include <string>
#include <utility>
#include <vector>

#include "dsin/autodiff.h"
#include "dsin/checkpoint.h"
#include "dsin/image.h"
#include "dsin/run_config.h"

namespace dsin {

// Distortion plus hinged rate: L1(x, x_dec) + beta * max(bpp - target, 0).
ad::Var LossPretrain(const ad::Var& x, const ad::Var& x_dec,
                     const ad::Var& rate_bpp, const LossWeights& w,
                     double target_bpp);

// (1 - alpha) L1(x, x_dec) + alpha L1(x, x_hat) + beta * hinge(bpp).
ad::Var LossJoint(const ad::Var& x, const ad::Var& x_dec, const ad::Var& x_hat,
                  const ad::Var& rate_bpp, const LossWeights& w,
                  double target_bpp);

struct MetricsRow {
  int iteration = 0;
  double loss = 0.0;
  double bpp = 0.0;
  double msssim = 0.0;
};

// Fixed formatting so equal-seed runs produce byte-identical logs.
std::string FormatMetricsRow(const MetricsRow& row);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> log;
};

// How the fusion stage sees the side image. kFull runs the patch search and
// fuses the assembled mosaic; kZeroYsyn keeps the fusion layers but feeds
// them an all-zero mosaic (capacity without side information); kRawY fuses
// the unaligned side image directly, skipping the search.
enum class SiMode { kFull, kZeroYsyn, kRawY };

// Runs cfg.train.stage over the pairs, cycling in order, one pair per
// iteration. `init` resumes from existing weights; null starts fresh from
// cfg.train.seed. Metrics rows are measured on the held-out pair (the last
// one when more than one is given, else the training pair itself). si_mode
// only matters in the joint stage.
TrainResult TrainStage(const std::vector<std::pair<ImageF, ImageF>>& pairs,
                       const RunConfig& cfg, const Checkpoint* init,
                       SiMode si_mode = SiMode::kFull);

// Doubles then bisects the rate weight until short probe runs land the
// coded rate within the target band. Returns the calibrated weight.
double CalibrateBeta(const std::vector<std::pair<ImageF, ImageF>>& pairs,
                     const RunConfig& cfg, int probe_iters, int rounds);

}  // namespace dsin

#endif  // DSIN_TRAINING_H_
