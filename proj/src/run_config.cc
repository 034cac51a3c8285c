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

#include "dsin/run_config.h"

#include <fstream>
#include <sstream>

#include "dsin/base.h"
#include "dsin/internal/config_json.h"
#include "json.hpp"

namespace dsin {
namespace {

using nlohmann::json;

void ExpectObject(const json& j, const std::string& what) {
  DSIN_REQUIRE(j.is_object(), "config section '" + what + "' must be a JSON object");
}

[[noreturn]] void UnknownKey(const std::string& section, const std::string& key) {
  throw DomainError("unknown key '" + key + "' in config section '" + section + "'");
}

}  // namespace

namespace internal {

void FromJson(const json& j, CodecConfig* c) {
  ExpectObject(j, "codec");
  for (const auto& [key, value] : j.items()) {
    if (key == "downsample_factor") c->downsample_factor = value.get<int>();
    else if (key == "latent_channels") c->latent_channels = value.get<int>();
    else if (key == "num_centers") c->num_centers = value.get<int>();
    else if (key == "base_width") c->base_width = value.get<int>();
    else if (key == "target_bpp") c->target_bpp = value.get<double>();
    else if (key == "tau") c->tau = value.get<double>();
    else if (key == "prob_floor") c->prob_floor = value.get<double>();
    else UnknownKey("codec", key);
  }
}

json ToJson(const CodecConfig& c) {
  return json{{"downsample_factor", c.downsample_factor},
              {"latent_channels", c.latent_channels},
              {"num_centers", c.num_centers},
              {"base_width", c.base_width},
              {"target_bpp", c.target_bpp},
              {"tau", c.tau},
              {"prob_floor", c.prob_floor}};
}

void FromJson(const json& j, SiNetConfig* c) {
  ExpectObject(j, "si_net");
  for (const auto& [key, value] : j.items()) {
    if (key == "width") c->width = value.get<int>();
    else if (key == "dilations") c->dilations = value.get<std::vector<int>>();
    else if (key == "residual") c->residual = value.get<bool>();
    else if (key == "lrelu_slope") c->lrelu_slope = value.get<double>();
    else UnknownKey("si_net", key);
  }
}

json ToJson(const SiNetConfig& c) {
  return json{{"width", c.width},
              {"dilations", c.dilations},
              {"residual", c.residual},
              {"lrelu_slope", c.lrelu_slope}};
}

void FromJson(const json& j, MatcherConfig* c) {
  ExpectObject(j, "matcher");
  for (const auto& [key, value] : j.items()) {
    if (key == "patch_h") c->patch_h = value.get<int>();
    else if (key == "patch_w") c->patch_w = value.get<int>();
    else if (key == "search_stride") c->search_stride = value.get<int>();
    else if (key == "color_transform") c->color_transform = value.get<std::string>();
    else if (key == "mask_enabled") c->mask_enabled = value.get<bool>();
    else if (key == "mask_sigma_y") c->mask_sigma_y = value.get<double>();
    else if (key == "mask_sigma_x") c->mask_sigma_x = value.get<double>();
    else UnknownKey("matcher", key);
  }
}

json ToJson(const MatcherConfig& c) {
  return json{{"patch_h", c.patch_h},
              {"patch_w", c.patch_w},
              {"search_stride", c.search_stride},
              {"color_transform", c.color_transform},
              {"mask_enabled", c.mask_enabled},
              {"mask_sigma_y", c.mask_sigma_y},
              {"mask_sigma_x", c.mask_sigma_x}};
}

}  // namespace internal

namespace {

using internal::FromJson;
using internal::ToJson;

void FromJson(const json& j, TrainConfig* c) {
  ExpectObject(j, "train");
  for (const auto& [key, value] : j.items()) {
    if (key == "lr") c->lr = value.get<double>();
    else if (key == "batch_size") c->batch_size = value.get<int>();
    else if (key == "iterations") c->iterations = value.get<int>();
    else if (key == "seed") c->seed = value.get<uint64_t>();
    else if (key == "stage") c->stage = value.get<std::string>();
    else if (key == "metrics_every") c->metrics_every = value.get<int>();
    else if (key == "center_min_gap") c->center_min_gap = value.get<double>();
    else UnknownKey("train", key);
  }
}

json ToJson(const TrainConfig& c) {
  return json{{"lr", c.lr},
              {"batch_size", c.batch_size},
              {"iterations", c.iterations},
              {"seed", c.seed},
              {"stage", c.stage},
              {"metrics_every", c.metrics_every},
              {"center_min_gap", c.center_min_gap}};
}

void FromJson(const json& j, LossWeights* c) {
  ExpectObject(j, "loss");
  for (const auto& [key, value] : j.items()) {
    if (key == "alpha") c->alpha = value.get<double>();
    else if (key == "beta") c->beta = value.get<double>();
    else if (key == "distortion") c->distortion = value.get<std::string>();
    else UnknownKey("loss", key);
  }
}

json ToJson(const LossWeights& c) {
  return json{{"alpha", c.alpha}, {"beta", c.beta}, {"distortion", c.distortion}};
}

void FromJson(const json& j, PairSpec* c) {
  ExpectObject(j, "data");
  for (const auto& [key, value] : j.items()) {
    if (key == "mode") c->mode = value.get<std::string>();
    else if (key == "time_offset") c->time_offset = value.get<int>();
    else if (key == "translation_px") c->translation_px = value.get<double>();
    else if (key == "affine_jitter") c->affine_jitter = value.get<double>();
    else if (key == "photometric_gain") c->photometric_gain = value.get<double>();
    else if (key == "photometric_bias") c->photometric_bias = value.get<double>();
    else if (key == "occlusion_fraction") c->occlusion_fraction = value.get<double>();
    else if (key == "noise_sigma") c->noise_sigma = value.get<double>();
    else if (key == "corr_lo") c->corr_lo = value.get<double>();
    else if (key == "corr_hi") c->corr_hi = value.get<double>();
    else if (key == "eval_h") c->eval_h = value.get<int>();
    else if (key == "eval_w") c->eval_w = value.get<int>();
    else UnknownKey("data", key);
  }
}

json ToJson(const PairSpec& c) {
  return json{{"mode", c.mode},
              {"time_offset", c.time_offset},
              {"translation_px", c.translation_px},
              {"affine_jitter", c.affine_jitter},
              {"photometric_gain", c.photometric_gain},
              {"photometric_bias", c.photometric_bias},
              {"occlusion_fraction", c.occlusion_fraction},
              {"noise_sigma", c.noise_sigma},
              {"corr_lo", c.corr_lo},
              {"corr_hi", c.corr_hi},
              {"eval_h", c.eval_h},
              {"eval_w", c.eval_w}};
}

}  // namespace

void LossWeights::Validate() const {
  DSIN_REQUIRE(alpha >= 0.0 && alpha <= 1.0, "loss.alpha must lie in [0, 1]");
  DSIN_REQUIRE(beta >= 0.0, "loss.beta must be non-negative");
  DSIN_REQUIRE(distortion == "l1", "loss.distortion must be 'l1'");
}

void TrainConfig::Validate() const {
  DSIN_REQUIRE(lr > 0.0, "train.lr must be positive");
  DSIN_REQUIRE(batch_size >= 1, "train.batch_size must be at least 1");
  DSIN_REQUIRE(iterations >= 1, "train.iterations must be at least 1");
  DSIN_REQUIRE(stage == "pretrain" || stage == "joint",
               "train.stage must be 'pretrain' or 'joint'");
  DSIN_REQUIRE(metrics_every >= 1, "train.metrics_every must be at least 1");
  DSIN_REQUIRE(center_min_gap > 0.0, "train.center_min_gap must be positive");
}

void PairSpec::Validate() const {
  DSIN_REQUIRE(mode == "synthetic" || mode == "stereo" || mode == "general",
               "data.mode must be 'synthetic', 'stereo' or 'general'");
  DSIN_REQUIRE(time_offset >= 0 && time_offset <= 3,
               "data.time_offset must lie in [0, 3]");
  DSIN_REQUIRE(translation_px >= 0.0, "data.translation_px must be non-negative");
  DSIN_REQUIRE(affine_jitter >= 0.0, "data.affine_jitter must be non-negative");
  DSIN_REQUIRE(photometric_gain >= 0.0, "data.photometric_gain must be non-negative");
  DSIN_REQUIRE(photometric_bias >= 0.0, "data.photometric_bias must be non-negative");
  DSIN_REQUIRE(occlusion_fraction >= 0.0 && occlusion_fraction < 1.0,
               "data.occlusion_fraction must lie in [0, 1)");
  DSIN_REQUIRE(noise_sigma >= 0.0, "data.noise_sigma must be non-negative");
  DSIN_REQUIRE(corr_lo > 0.0 && corr_lo < corr_hi && corr_hi <= 1.0,
               "data correlation band needs 0 < corr_lo < corr_hi <= 1");
  DSIN_REQUIRE(eval_h >= 1 && eval_w >= 1, "data eval size must be positive");
}

void RunConfig::Validate() const {
  codec.Validate();
  si_net.Validate();
  matcher.Validate();
  train.Validate();
  loss.Validate();
  data.Validate();
}

RunConfig RunConfigFromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config is not valid JSON: ") + e.what());
  }
  ExpectObject(j, "<root>");
  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "codec") FromJson(value, &cfg.codec);
      else if (key == "si_net") FromJson(value, &cfg.si_net);
      else if (key == "matcher") FromJson(value, &cfg.matcher);
      else if (key == "train") FromJson(value, &cfg.train);
      else if (key == "loss") FromJson(value, &cfg.loss);
      else if (key == "data") FromJson(value, &cfg.data);
      else UnknownKey("<root>", key);
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("config field has the wrong type: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string RunConfigToJsonText(const RunConfig& cfg) {
  json j{{"codec", ToJson(cfg.codec)},     {"si_net", ToJson(cfg.si_net)},
         {"matcher", ToJson(cfg.matcher)}, {"train", ToJson(cfg.train)},
         {"loss", ToJson(cfg.loss)},       {"data", ToJson(cfg.data)}};
  return j.dump(2) + "\n";
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  DSIN_REQUIRE(in.good(), "cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return RunConfigFromJsonText(text.str());
}

void SaveRunConfig(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  DSIN_REQUIRE(out.good(), "cannot write config file: " + path);
  out << RunConfigToJsonText(cfg);
  DSIN_CHECK(out.good(), "short write to config file: " + path);
}

}  // namespace dsin
