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

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "dsin/base.h"
#include "dsin/rng.h"
#include "dsin/tensor.h"
#include "test_util.h"

namespace dsin {
namespace {

RunConfig SmallRunConfig() {
  RunConfig cfg;
  cfg.codec.downsample_factor = 4;
  cfg.codec.latent_channels = 2;
  cfg.codec.num_centers = 6;
  cfg.codec.base_width = 4;
  cfg.si_net.width = 3;
  cfg.si_net.dilations = {1, 2};
  cfg.matcher.patch_h = 8;
  cfg.matcher.patch_w = 8;
  cfg.matcher.search_stride = 2;
  cfg.train.lr = 1e-3;
  cfg.train.iterations = 5;
  cfg.train.metrics_every = 1;
  return cfg;
}

// Low-frequency ramp the tiny codec can fit almost exactly.
ImageF SmoothImage(int h, int w) {
  ImageF img(h, w, 3);
  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        img.At(ch, y, x) = 0.2 + 0.3 * y / (h - 1.0) + 0.2 * x / (w - 1.0);
      }
    }
  }
  return img;
}

TEST_CASE("loss terms combine with the documented weights") {
  auto flat = [](double v) {
    Tensor t({1, 2, 2});
    t.v.assign(4, v);
    return ad::Constant(t);
  };
  ad::Var x = flat(0.5);
  ad::Var x_dec = flat(0.25);  // L1 = 0.25
  ad::Var x_hat = flat(0.45);  // L1 = 0.05
  ad::Var bpp = ad::Constant(Tensor::Scalar(0.3));
  LossWeights w;
  w.alpha = 0.7;
  w.beta = 2.0;

  SUBCASE("pretrain is distortion plus the hinged rate") {
    const double got = LossPretrain(x, x_dec, bpp, w, 0.1)->value.v[0];
    CHECK(got == doctest::Approx(0.25 + 2.0 * 0.2).epsilon(1e-12));
  }
  SUBCASE("a rate under target leaves pure distortion") {
    const double got = LossPretrain(x, x_dec, bpp, w, 0.9)->value.v[0];
    CHECK(got == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("joint blends both reconstructions") {
    const double got = LossJoint(x, x_dec, x_hat, bpp, w, 0.1)->value.v[0];
    CHECK(got ==
          doctest::Approx(0.3 * 0.25 + 0.7 * 0.05 + 2.0 * 0.2).epsilon(1e-12));
  }
  SUBCASE("alpha 1 scores only the fused output") {
    w.alpha = 1.0;
    const double got = LossJoint(x, x_dec, x_hat, bpp, w, 0.1)->value.v[0];
    CHECK(got == doctest::Approx(0.05 + 2.0 * 0.2).epsilon(1e-12));
  }
  SUBCASE("alpha 0 scores only the plain decode") {
    w.alpha = 0.0;
    const double got = LossJoint(x, x_dec, x_hat, bpp, w, 0.1)->value.v[0];
    CHECK(got == doctest::Approx(0.25 + 2.0 * 0.2).epsilon(1e-12));
  }
}

TEST_CASE("loss gradients agree with finite differences") {
  Rng rng(7);
  LossWeights w;
  w.alpha = 0.7;
  w.beta = 2.0;
  Tensor x_ref({2, 3, 3});
  x_ref.v.assign(x_ref.size(), 0.0);

  Tensor a = testutil::RandTensor({2, 3, 3}, rng);
  Tensor b = testutil::RandTensor({2, 3, 3}, rng);
  // Keep every residual away from the L1 kink.
  for (double& v : a.v) v = 0.25 + 0.5 * v;
  for (double& v : b.v) v = 0.25 + 0.5 * v;
  Tensor bpp0 = Tensor::Scalar(0.3);

  auto joint = [&](std::vector<ad::Var>& in) {
    return LossJoint(ad::Constant(x_ref), in[0], in[1], in[2], w, 0.1);
  };
  CHECK(testutil::FdMaxRelError(joint, {a, b, bpp0}, 0) < 1e-6);
  CHECK(testutil::FdMaxRelError(joint, {a, b, bpp0}, 1) < 1e-6);
  CHECK(testutil::FdMaxRelError(joint, {a, b, bpp0}, 2) < 1e-6);

  auto pre = [&](std::vector<ad::Var>& in) {
    return LossPretrain(ad::Constant(x_ref), in[0], in[1], w, 0.1);
  };
  CHECK(testutil::FdMaxRelError(pre, {a, bpp0}, 0) < 1e-6);
  CHECK(testutil::FdMaxRelError(pre, {a, bpp0}, 1) < 1e-6);
}

TEST_CASE("metrics rows format with fixed width") {
  MetricsRow row;
  row.iteration = 3;
  row.loss = 0.5;
  row.bpp = 0.15;
  row.msssim = 0.9;
  CHECK(FormatMetricsRow(row) == "3,0.50000000,0.15000000,0.90000000");
  row.iteration = 1200;
  row.loss = 1.0 / 3.0;
  CHECK(FormatMetricsRow(row) == "1200,0.33333333,0.15000000,0.90000000");
}

TEST_CASE("training rejects bad inputs") {
  RunConfig cfg = SmallRunConfig();
  Rng rng(11);
  CHECK_THROWS_AS(TrainStage({}, cfg, nullptr), DomainError);

  std::vector<std::pair<ImageF, ImageF>> grey_pair = {
      {Luma(testutil::RandImage(16, 16, 3, rng)),
       testutil::RandImage(16, 16, 3, rng)}};
  CHECK_THROWS_AS(TrainStage(grey_pair, cfg, nullptr), DomainError);
}

TEST_CASE("training aborts on a non-finite loss") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 2;
  Rng rng(12);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)}};

  ModelBundle model =
      MakeModel(cfg.codec, cfg.si_net, cfg.matcher, cfg.train.seed);
  Checkpoint poisoned = ToCheckpoint(model);
  poisoned.params["enc.stem.b"].v[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TrainStage(pairs, cfg, &poisoned), DomainError);
}

TEST_CASE("resuming requires the same architecture") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 1;
  Rng rng(13);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)}};
  const TrainResult first = TrainStage(pairs, cfg, nullptr);

  RunConfig other = cfg;
  other.codec.latent_channels = 3;
  CHECK_THROWS_AS(TrainStage(pairs, other, &first.checkpoint), DomainError);

  const TrainResult resumed = TrainStage(pairs, cfg, &first.checkpoint);
  CHECK(resumed.checkpoint.params != first.checkpoint.params);
}

TEST_CASE("metrics land on the configured schedule") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 5;
  cfg.train.metrics_every = 2;
  Rng rng(14);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)}};
  const TrainResult r = TrainStage(pairs, cfg, nullptr);
  REQUIRE(r.log.size() == 3);
  CHECK(r.log[0].iteration == 2);
  CHECK(r.log[1].iteration == 4);
  CHECK(r.log[2].iteration == 5);
  for (const MetricsRow& row : r.log) {
    CHECK(std::isfinite(row.loss));
    CHECK(std::isfinite(row.bpp));
    CHECK(row.bpp > 0.0);
    CHECK(row.msssim <= 1.0);
  }
}

TEST_CASE("metrics are computed on the held-out last pair") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 1;
  cfg.train.lr = 1e-12;  // keep the entropy model essentially uniform
  Rng rng(15);
  // Training pair is divisible by the downsample factor; the held-out pair
  // is not, so its padded latent prices more symbols per original pixel.
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)},
      {testutil::RandImage(14, 18, 3, rng),
       testutil::RandImage(14, 18, 3, rng)}};
  const TrainResult r = TrainStage(pairs, cfg, nullptr);
  REQUIRE(r.log.size() == 1);
  const double held_out_bpp = 2.0 * 4 * 5 * std::log2(6.0) / (14.0 * 18.0);
  const double train_bpp = 2.0 * 4 * 4 * std::log2(6.0) / (16.0 * 16.0);
  CHECK(r.log[0].bpp == doctest::Approx(held_out_bpp).epsilon(1e-3));
  CHECK(std::abs(r.log[0].bpp - train_bpp) > 0.05);
}

TEST_CASE("equal seeds give identical logs and checkpoints") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 8;
  cfg.train.stage = "pretrain";
  Rng rng(16);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 24, 3, rng),
       testutil::RandImage(16, 24, 3, rng)}};

  const TrainResult a = TrainStage(pairs, cfg, nullptr);
  const TrainResult b = TrainStage(pairs, cfg, nullptr);
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(FormatMetricsRow(a.log[i]) == FormatMetricsRow(b.log[i]));
  }
  CHECK(a.checkpoint.params == b.checkpoint.params);

  RunConfig other = cfg;
  other.train.seed = cfg.train.seed + 1;
  const TrainResult c = TrainStage(pairs, other, nullptr);
  CHECK(c.checkpoint.params != a.checkpoint.params);
}

TEST_CASE("pretraining leaves the fusion parameters untouched") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 5;
  cfg.train.stage = "pretrain";
  Rng rng(17);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)}};

  const Checkpoint init = ToCheckpoint(
      MakeModel(cfg.codec, cfg.si_net, cfg.matcher, cfg.train.seed));
  const TrainResult r = TrainStage(pairs, cfg, nullptr);
  CHECK(r.checkpoint.params.at("si.l0.w") == init.params.at("si.l0.w"));
  CHECK(r.checkpoint.params.at("si.head.w") == init.params.at("si.head.w"));
  CHECK(r.checkpoint.params.at("enc.stem.w") != init.params.at("enc.stem.w"));
}

TEST_CASE("joint training moves the fusion parameters") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 3;
  cfg.train.stage = "joint";
  Rng rng(18);
  const ImageF x = testutil::RandImage(24, 32, 3, rng);
  std::vector<std::pair<ImageF, ImageF>> pairs = {{x, Roll(x, 2, 3)}};

  const Checkpoint init = ToCheckpoint(
      MakeModel(cfg.codec, cfg.si_net, cfg.matcher, cfg.train.seed));
  const TrainResult r = TrainStage(pairs, cfg, nullptr);
  CHECK(r.checkpoint.params.at("si.l0.w") != init.params.at("si.l0.w"));
  CHECK(r.checkpoint.params.at("si.head.w") != init.params.at("si.head.w"));
  for (const MetricsRow& row : r.log) {
    CHECK(std::isfinite(row.loss));
    CHECK(std::isfinite(row.msssim));
  }
}

TEST_CASE("learned centers keep the configured minimum spacing") {
  RunConfig cfg = SmallRunConfig();
  cfg.train.iterations = 30;
  cfg.train.metrics_every = 30;
  cfg.train.center_min_gap = 0.05;
  cfg.train.lr = 5e-3;
  Rng rng(19);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)}};
  const TrainResult r = TrainStage(pairs, cfg, nullptr);
  const Tensor& centers = r.checkpoint.params.at("quant.centers");
  for (size_t k = 1; k < centers.v.size(); ++k) {
    CHECK(centers.v[k] - centers.v[k - 1] >= 0.05 - 1e-12);
  }
}

TEST_CASE("a single smooth pair overfits to a small distortion") {
  RunConfig cfg = SmallRunConfig();
  cfg.codec.base_width = 6;
  cfg.loss.beta = 0.0;  // distortion only
  cfg.train.lr = 2e-3;
  Rng rng(20);
  const ImageF x = SmoothImage(24, 32);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {x, testutil::RandImage(24, 32, 3, rng)}};

  RunConfig probe = cfg;
  probe.train.iterations = 1;
  probe.train.metrics_every = 1;
  const double initial = TrainStage(pairs, probe, nullptr).log[0].loss;

  cfg.train.iterations = 500;
  cfg.train.metrics_every = 500;
  const TrainResult r = TrainStage(pairs, cfg, nullptr);
  const double final_loss = r.log.back().loss;
  CHECK(final_loss < 0.25 * initial);
  CHECK(r.log.back().msssim > 0.9);
}

TEST_CASE("rate-weight calibration lands at or under the target") {
  RunConfig cfg = SmallRunConfig();
  cfg.codec.target_bpp = 0.30;
  cfg.loss.beta = 1.0;
  cfg.train.lr = 5e-3;
  Rng rng(21);
  std::vector<std::pair<ImageF, ImageF>> pairs = {
      {testutil::RandImage(16, 16, 3, rng),
       testutil::RandImage(16, 16, 3, rng)}};

  CHECK_THROWS_AS(CalibrateBeta(pairs, cfg, 0, 2), DomainError);
  CHECK_THROWS_AS(CalibrateBeta(pairs, cfg, 2, -1), DomainError);

  const double beta = CalibrateBeta(pairs, cfg, 30, 2);
  CHECK(beta > 0.0);
  CHECK(std::isfinite(beta));

  RunConfig check = cfg;
  check.loss.beta = beta;
  check.train.iterations = 30;
  check.train.metrics_every = 30;
  const TrainResult r = TrainStage(pairs, check, nullptr);
  CHECK(r.log.back().bpp <= cfg.codec.target_bpp * 1.25);
}

}  // namespace
}  // namespace dsin
