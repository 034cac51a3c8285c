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

#include "dsin/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "dsin/codec.h"
#include "dsin/metrics.h"
#include "dsin/si_finder.h"
#include "dsin/si_net.h"
#include "dsin/tensor.h"

namespace dsin {
namespace {

// Mosaic the fusion stage consumes for one pair under the given mode. The
// kFull path mirrors the deployed decoder: match against the decoded side
// image, then assemble from the original side image.
ImageF MosaicFor(const ModelBundle& model, const ImageF& x_dec, const ImageF& y,
                 SiMode si_mode) {
  switch (si_mode) {
    case SiMode::kZeroYsyn: {
      ImageF zeros(x_dec.h, x_dec.w, x_dec.c);
      return zeros;
    }
    case SiMode::kRawY:
      DSIN_REQUIRE(y.h == x_dec.h && y.w == x_dec.w,
                   "raw side fusion needs matching image dimensions");
      return y;
    case SiMode::kFull:
      break;
  }
  ad::NoGradGuard guard;
  const LatentGrid si_grid = EncodeImage(model.codec, model.params, y);
  const ImageF y_dec = DecodeImage(model.codec, model.params, si_grid);
  const PatchAssignment f = FindAssignment(x_dec, y_dec, model.matcher);
  return AssembleYsyn(y, f);
}

// Full quality path on fixed weights: hard-quantized rate on the held-out
// image plus the reconstruction the deployed decoder would produce.
MetricsRow EvalHeldOut(const ModelBundle& model, bool joint, const ImageF& x,
                       const ImageF& y, SiMode si_mode) {
  ad::NoGradGuard guard;
  const LatentGrid grid = EncodeImage(model.codec, model.params, x);
  const RateReport rate =
      Rate(grid, EntropyModelFrom(model.codec, model.params));
  ImageF out = DecodeImage(model.codec, model.params, grid);
  if (joint) {
    const ImageF y_syn = MosaicFor(model, out, y, si_mode);
    ad::Var fused =
        SiNetFuse(model.si_net, model.params, ad::Constant(FromImage(out)),
                  ad::Constant(FromImage(y_syn)));
    out = ClampUnit(ToImage(fused->value));
  }
  MetricsRow row;
  row.bpp = rate.bpp;
  row.msssim = MsSsim(x, out);
  return row;
}

// Keeps the learned centers sorted with a minimum spacing so nearest-center
// quantization and the range-coder alphabet stay well defined.
void ProjectCenters(ad::ParamStore& params, double min_gap) {
  ad::Var centers = params.Get("quant.centers");
  std::vector<double>& c = centers->value.v;
  for (size_t k = 1; k < c.size(); ++k) {
    c[k] = std::max(c[k], c[k - 1] + min_gap);
  }
}

// Builds the loss graph for one training pair on the current weights. The
// side image enters only through the synthesized mosaic, which is wired in
// as a constant, so no gradient can reach the side payload.
ad::Var PairLoss(ModelBundle& model, const RunConfig& cfg, bool joint,
                 const ImageF& x, const ImageF& y, SiMode si_mode) {
  const ImageF x_pad = PadToMultiple(x, cfg.codec.downsample_factor);
  ad::Var xin = ad::Constant(FromImage(x_pad));
  ad::Var x_ref = ad::Constant(FromImage(x));

  ad::Var z = CodecEncode(cfg.codec, model.params, xin);
  ad::Var zq = ad::QuantizeSte(z, CentersFrom(model.params), nullptr);
  ad::Var bits =
      ad::SoftRateBits(z, model.params.Get("quant.centers"),
                       model.params.Get("entropy.logits"), cfg.codec.tau,
                       cfg.codec.prob_floor);
  ad::Var bpp = ad::Scale(bits, 1.0 / (static_cast<double>(x.h) * x.w));
  ad::Var dec_full = CodecDecode(cfg.codec, model.params, zq);
  ad::Var x_dec = ad::Crop(dec_full, x.h, x.w);

  if (!joint) {
    return LossPretrain(x_ref, x_dec, bpp, cfg.loss, cfg.codec.target_bpp);
  }

  const ImageF x_dec_img = ClampUnit(ToImage(x_dec->value));
  const ImageF y_syn = MosaicFor(model, x_dec_img, y, si_mode);
  ad::Var x_hat = SiNetFuse(cfg.si_net, model.params, x_dec,
                            ad::Constant(FromImage(y_syn)));
  return LossJoint(x_ref, x_dec, x_hat, bpp, cfg.loss, cfg.codec.target_bpp);
}

}  // namespace

ad::Var LossPretrain(const ad::Var& x, const ad::Var& x_dec,
                     const ad::Var& rate_bpp, const LossWeights& w,
                     double target_bpp) {
  w.Validate();
  ad::Var distortion = ad::L1Loss(x, x_dec);
  ad::Var rate = ad::Scale(ad::HingeAbove(rate_bpp, target_bpp), w.beta);
  return ad::AddScalar(distortion, rate);
}

ad::Var LossJoint(const ad::Var& x, const ad::Var& x_dec, const ad::Var& x_hat,
                  const ad::Var& rate_bpp, const LossWeights& w,
                  double target_bpp) {
  w.Validate();
  ad::Var base = ad::Scale(ad::L1Loss(x, x_dec), 1.0 - w.alpha);
  ad::Var fused = ad::Scale(ad::L1Loss(x, x_hat), w.alpha);
  ad::Var rate = ad::Scale(ad::HingeAbove(rate_bpp, target_bpp), w.beta);
  return ad::AddScalar(ad::AddScalar(base, fused), rate);
}

std::string FormatMetricsRow(const MetricsRow& row) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%.8f,%.8f,%.8f", row.iteration, row.loss,
                row.bpp, row.msssim);
  return std::string(buf);
}

TrainResult TrainStage(const std::vector<std::pair<ImageF, ImageF>>& pairs,
                       const RunConfig& cfg, const Checkpoint* init,
                       SiMode si_mode) {
  cfg.Validate();
  DSIN_REQUIRE(!pairs.empty(), "TrainStage: no training pairs");
  for (const auto& [x, y] : pairs) {
    DSIN_REQUIRE(x.c == 3 && y.c == 3, "TrainStage: pairs must be 3-channel");
    DSIN_REQUIRE(x.h > 0 && x.w > 0 && y.h > 0 && y.w > 0,
                 "TrainStage: empty image in a pair");
  }
  const bool joint = cfg.train.stage == "joint";

  ModelBundle model;
  if (init != nullptr) {
    RequireSameArchitecture(*init, cfg.codec, cfg.si_net);
    model = ModelFromCheckpoint(*init);
    model.matcher = cfg.matcher;
  } else {
    model = MakeModel(cfg.codec, cfg.si_net, cfg.matcher, cfg.train.seed);
  }

  // With several pairs the last one is held out for metrics; a single pair
  // both trains and reports.
  const size_t train_count = pairs.size() > 1 ? pairs.size() - 1 : 1;
  const ImageF& eval_x = pairs.back().first;
  const ImageF& eval_y = pairs.back().second;

  ad::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.train.lr;
  ad::Adam opt(adam_cfg);

  TrainResult result;
  for (int it = 0; it < cfg.train.iterations; ++it) {
    ad::Var loss;
    for (int b = 0; b < cfg.train.batch_size; ++b) {
      const size_t idx =
          (static_cast<size_t>(it) * cfg.train.batch_size + b) % train_count;
      ad::Var term = PairLoss(model, cfg, joint, pairs[idx].first,
                              pairs[idx].second, si_mode);
      loss = b == 0 ? term : ad::AddScalar(loss, term);
    }
    if (cfg.train.batch_size > 1) {
      loss = ad::Scale(loss, 1.0 / cfg.train.batch_size);
    }

    const double loss_val = loss->value.v[0];
    DSIN_REQUIRE(std::isfinite(loss_val),
                 "TrainStage: non-finite loss at iteration " +
                     std::to_string(it + 1));

    model.params.ZeroGrad();
    ad::Backward(loss);
    opt.Step(model.params);
    ProjectCenters(model.params, cfg.train.center_min_gap);

    if ((it + 1) % cfg.train.metrics_every == 0 ||
        it + 1 == cfg.train.iterations) {
      MetricsRow row = EvalHeldOut(model, joint, eval_x, eval_y, si_mode);
      row.iteration = it + 1;
      row.loss = loss_val;
      result.log.push_back(row);
    }
  }

  result.checkpoint = ToCheckpoint(model);
  return result;
}

double CalibrateBeta(const std::vector<std::pair<ImageF, ImageF>>& pairs,
                     const RunConfig& cfg, int probe_iters, int rounds) {
  cfg.Validate();
  DSIN_REQUIRE(probe_iters >= 1, "CalibrateBeta: probe_iters must be >= 1");
  DSIN_REQUIRE(rounds >= 0, "CalibrateBeta: rounds must be >= 0");

  // Final coded rate of a short probe run; decreasing in beta.
  auto probe_bpp = [&](double beta) {
    RunConfig probe = cfg;
    probe.train.iterations = probe_iters;
    probe.loss.beta = beta;
    return TrainStage(pairs, probe, nullptr).log.back().bpp;
  };

  const double target = cfg.codec.target_bpp;
  const double beta = cfg.loss.beta > 0.0 ? cfg.loss.beta : 1.0;
  double lo = beta, hi = beta;  // lo leaves rate above target, hi at or under
  bool bracketed = false;
  if (probe_bpp(beta) > target) {
    for (int i = 0; i < 12 && !bracketed; ++i) {
      hi *= 2.0;
      bracketed = probe_bpp(hi) <= target;
      if (!bracketed) lo = hi;
    }
    if (!bracketed) return hi;
  } else {
    for (int i = 0; i < 12 && !bracketed; ++i) {
      lo /= 2.0;
      bracketed = probe_bpp(lo) > target;
      if (!bracketed) hi = lo;
    }
    if (!bracketed) return hi;
  }
  for (int r = 0; r < rounds; ++r) {
    const double mid = std::sqrt(lo * hi);
    if (probe_bpp(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace dsin
