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

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dsin/base.h"
#include "dsin/checkpoint.h"
#include "dsin/container.h"
#include "dsin/coset.h"
#include "dsin/data_pairs.h"
#include "dsin/eval.h"
#include "dsin/image.h"
#include "dsin/metrics.h"
#include "dsin/rng.h"
#include "dsin/run_config.h"
#include "dsin/training.h"

namespace {

namespace fs = std::filesystem;
using namespace dsin;

struct GlobalOpts {
  std::string config_path;
  int64_t seed = -1;  // negative keeps the config's seed
  std::string data_root;
  std::string run_root = "runs";
  std::string run_name;
};

struct PairOpts {
  std::string manifest;
  int synthetic = 4;
};

RunConfig LoadConfig(const GlobalOpts& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = LoadRunConfig(g.config_path);
  if (g.seed >= 0) cfg.train.seed = static_cast<uint64_t>(g.seed);
  cfg.Validate();
  return cfg;
}

std::string DataRoot(const GlobalOpts& g) {
  if (!g.data_root.empty()) return g.data_root;
  const char* env = std::getenv("DSIN_DATA");
  return env != nullptr ? env : "";
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  DSIN_REQUIRE(out.good(), "cannot open for writing: " + path);
  out << text;
}

// Creates the run directory, records the effective config and the invocation
// so every artifact in it can be traced back to its inputs.
std::string PrepareRun(const GlobalOpts& g, const std::string& default_name,
                       const RunConfig& cfg, int argc, char** argv) {
  const std::string name = g.run_name.empty() ? default_name : g.run_name;
  const std::string run = MakeRunDir(g.run_root, name);
  SaveRunConfig((fs::path(run) / "manifest.json").string(), cfg);
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) cmd += ' ';
    cmd += argv[i];
  }
  cmd += '\n';
  WriteText((fs::path(run) / "logs" / "command.txt").string(), cmd);
  return run;
}

std::vector<std::pair<ImageF, ImageF>> MakeSyntheticPairs(const RunConfig& cfg,
                                                          int count,
                                                          uint64_t seed) {
  DSIN_REQUIRE(count > 0, "need at least one synthetic pair");
  std::vector<std::pair<ImageF, ImageF>> out;
  for (int i = 0; i < count; ++i) {
    const ImageF base =
        MakeBaseImage(cfg.data.eval_h, cfg.data.eval_w,
                      Rng::Mix(seed, 0x62617365 + static_cast<uint64_t>(i)));
    SynthPair sp = MakeSynthPair(
        base, cfg.data, Rng::Mix(seed, 0x70616972 + static_cast<uint64_t>(i)));
    out.emplace_back(std::move(sp.x), std::move(sp.y));
  }
  return out;
}

std::vector<std::pair<ImageF, ImageF>> LoadPairs(const GlobalOpts& g,
                                                 const PairOpts& p,
                                                 const RunConfig& cfg) {
  if (!p.manifest.empty()) {
    return LoadPairImages(ReadManifest(p.manifest), DataRoot(g));
  }
  return MakeSyntheticPairs(cfg, p.synthetic, cfg.train.seed);
}

ImageF LoadImageRgb(const std::string& path) {
  ImageF img = ToFloat(ReadPng(path));
  if (img.c == 3) return img;
  ImageF rgb(img.h, img.w, 3);
  for (int ch = 0; ch < 3; ++ch) {
    std::copy(img.Plane(0), img.Plane(0) + size_t(img.h) * img.w,
              rgb.Plane(ch));
  }
  return rgb;
}

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return std::string(buf);
}

void PrintMeanReport(const char* tag, const QualityReport& r) {
  std::printf("%s msssim=%s l1=%s psnr=%s bpp_estimated=%s bpp_coded=%s\n",
              tag, Fmt("%.8f", r.msssim).c_str(), Fmt("%.8f", r.l1).c_str(),
              Fmt("%.8f", r.psnr).c_str(),
              Fmt("%.8f", r.bpp_estimated).c_str(),
              Fmt("%.8f", r.bpp_coded).c_str());
}

bool InPath(const std::string& exe) {
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    std::error_code ec;
    if (fs::exists(fs::path(dir) / exe, ec)) return true;
  }
  return false;
}

// Rate-quality baselines from external codec binaries, invoked as
// subprocesses when present; a missing binary skips that codec with a
// notice. These codecs are never reimplemented here.
std::vector<SvgSeries> ExternalCodecCurves(
    const std::vector<std::pair<ImageF, ImageF>>& pairs,
    const std::string& scratch) {
  struct Codec {
    const char* name;
    const char* enc;
    const char* dec;
    std::vector<std::string> settings;
  };
  const std::vector<Codec> codecs = {
      {"jpeg2000", "opj_compress", "opj_decompress", {"160", "80", "40"}},
      {"bpg", "bpgenc", "bpgdec", {"49", "44", "39"}},
  };

  std::vector<SvgSeries> out;
  for (const Codec& codec : codecs) {
    if (!InPath(codec.enc) || !InPath(codec.dec)) {
      std::printf("notice: external codec baseline %s skipped: %s not found\n",
                  codec.name, InPath(codec.enc) ? codec.dec : codec.enc);
      continue;
    }
    fs::create_directories(scratch);
    std::vector<std::vector<RdPoint>> per_image(pairs.size());
    bool failed = false;
    for (size_t i = 0; i < pairs.size() && !failed; ++i) {
      const ImageF& x = pairs[i].first;
      const std::string in_png =
          (fs::path(scratch) / (std::string(codec.name) + "_in.png")).string();
      WritePng(in_png, ToU8(x));
      for (const std::string& setting : codec.settings) {
        const std::string coded =
            (fs::path(scratch) / (std::string(codec.name) + "_out")).string();
        const std::string dec_png =
            (fs::path(scratch) / (std::string(codec.name) + "_dec.png"))
                .string();
        std::string enc_cmd, dec_cmd;
        if (std::string(codec.name) == "jpeg2000") {
          enc_cmd = std::string(codec.enc) + " -i \"" + in_png + "\" -o \"" +
                    coded + ".j2k\" -r " + setting + " > /dev/null 2>&1";
          dec_cmd = std::string(codec.dec) + " -i \"" + coded +
                    ".j2k\" -o \"" + dec_png + "\" > /dev/null 2>&1";
        } else {
          enc_cmd = std::string(codec.enc) + " -q " + setting + " -o \"" +
                    coded + ".bpg\" \"" + in_png + "\" > /dev/null 2>&1";
          dec_cmd = std::string(codec.dec) + " -o \"" + dec_png + "\" \"" +
                    coded + ".bpg\" > /dev/null 2>&1";
        }
        const std::string coded_file =
            coded + (std::string(codec.name) == "jpeg2000" ? ".j2k" : ".bpg");
        if (std::system(enc_cmd.c_str()) != 0 ||
            std::system(dec_cmd.c_str()) != 0) {
          std::printf("notice: external codec baseline %s failed; skipping\n",
                      codec.name);
          failed = true;
          break;
        }
        const double bpp =
            8.0 * static_cast<double>(fs::file_size(coded_file)) /
            (static_cast<double>(x.h) * x.w);
        const ImageF dec = LoadImageRgb(dec_png);
        per_image[i].push_back({bpp, MsSsim(x, dec)});
      }
    }
    if (failed) continue;
    SvgSeries series;
    series.label = codec.name;
    const RdCurve avg = RdAverage(per_image);
    series.points = avg.points;
    out.push_back(std::move(series));
  }
  return out;
}

int RunToyCoset() {
  CosetConfig cfg;
  cfg.Validate();
  const int walk_symbol = CosetEncode(110, cfg);
  const int walk_decoded = CosetDecode(walk_symbol, 113, cfg);
  std::printf("walk-through: x=110 y=113 -> symbol=%d -> decoded=%d (%s)\n",
              walk_symbol, walk_decoded,
              walk_decoded == 110 ? "exact" : "WRONG");

  int64_t total = 0, exact = 0;
  for (int x = 0; x <= cfg.alphabet_max; ++x) {
    const int lo = std::max(0, x - cfg.correlation_bound);
    const int hi = std::min(cfg.alphabet_max, x + cfg.correlation_bound);
    for (int y = lo; y <= hi; ++y) {
      ++total;
      if (CosetDecode(CosetEncode(x, cfg), y, cfg) == x) ++exact;
    }
  }
  std::printf("exhaustive: %lld/%lld pairs with |x-y|<=%d recovered exactly "
              "at %d bits/symbol (M=%d)\n",
              static_cast<long long>(exact), static_cast<long long>(total),
              cfg.correlation_bound, CosetSymbolBits(cfg), cfg.modulus);
  const bool pass = walk_symbol == 6 && walk_decoded == 110 && exact == total;
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

std::vector<std::pair<double, double>> ParseBands(
    const std::vector<std::string>& specs) {
  std::vector<std::pair<double, double>> bands;
  for (const std::string& s : specs) {
    const size_t colon = s.find(':');
    DSIN_REQUIRE(colon != std::string::npos,
                 "band must look like lo:hi, got " + s);
    bands.emplace_back(std::stod(s.substr(0, colon)),
                       std::stod(s.substr(colon + 1)));
  }
  return bands;
}

int g_exit = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learned image compression with decoder-only side information"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "run config JSON");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--data-root", g.data_root,
                 "dataset root (falls back to DSIN_DATA)");
  app.add_option("--run-root", g.run_root, "directory run outputs go under");
  app.add_option("--name", g.run_name, "run directory name");

  // train
  auto* train = app.add_subcommand("train", "train one stage");
  train->fallthrough();
  PairOpts train_pairs_opt;
  std::string train_stage, train_init, train_out;
  int train_iters = -1;
  bool calibrate = false;
  train->add_option("--manifest", train_pairs_opt.manifest,
                    "pair manifest file");
  train->add_option("--pairs", train_pairs_opt.synthetic,
                    "synthetic pair count when no manifest is given");
  train->add_option("--stage", train_stage, "pretrain or joint");
  train->add_option("--iterations", train_iters, "override iteration count");
  train->add_option("--init", train_init, "checkpoint to resume from");
  train->add_option("-o,--out", train_out, "checkpoint output path");
  train->add_flag("--calibrate-beta", calibrate,
                  "bisect beta to hit the target rate before training");
  train->callback([&] {
    RunConfig cfg = LoadConfig(g);
    if (!train_stage.empty()) cfg.train.stage = train_stage;
    if (train_iters > 0) cfg.train.iterations = train_iters;
    DSIN_REQUIRE(
        cfg.train.stage != "joint" || !train_init.empty(),
        "the joint stage needs --init with a pretrained checkpoint");
    const auto pairs = LoadPairs(g, train_pairs_opt, cfg);
    if (calibrate) {
      const int probe = std::min(cfg.train.iterations, 200);
      cfg.loss.beta = CalibrateBeta(pairs, cfg, probe, 4);
      std::printf("calibrated beta=%s\n", Fmt("%.6f", cfg.loss.beta).c_str());
    }
    const std::string run = PrepareRun(g, "train", cfg, argc, argv);

    Checkpoint init;
    const bool resume = !train_init.empty();
    if (resume) init = LoadCheckpoint(train_init);
    const TrainResult res =
        TrainStage(pairs, cfg, resume ? &init : nullptr);

    std::string log_text = "iteration,loss,bpp,msssim\n";
    for (const MetricsRow& row : res.log) {
      const std::string line = FormatMetricsRow(row);
      std::printf("%s\n", line.c_str());
      log_text += line + "\n";
    }
    WriteText((fs::path(run) / "logs" / "metrics.csv").string(), log_text);

    const std::string out_path =
        train_out.empty() ? (fs::path(run) / "model.dsck").string()
                          : train_out;
    SaveCheckpoint(out_path, res.checkpoint);
    std::printf("checkpoint written: %s\n", out_path.c_str());
  });

  // compress
  auto* compress = app.add_subcommand("compress", "encode one image");
  compress->fallthrough();
  std::string c_in, c_model, c_out;
  compress->add_option("-i,--input", c_in, "input PNG")->required();
  compress->add_option("-m,--model", c_model, "checkpoint")->required();
  compress->add_option("-o,--out", c_out, "output bitstream")->required();
  compress->callback([&] {
    const Checkpoint ckpt = LoadCheckpoint(c_model);
    const ModelBundle model = ModelFromCheckpoint(ckpt);
    const CompressResult res =
        CompressFile(model, CheckpointHash(c_model), LoadImageRgb(c_in), c_out);
    std::printf("wrote %s: %llu bytes, bpp_coded=%s, bpp_estimated=%s\n",
                c_out.c_str(), static_cast<unsigned long long>(res.file_bytes),
                Fmt("%.8f", res.bpp_coded).c_str(),
                Fmt("%.8f", res.bpp_estimated).c_str());
  });

  // decompress
  auto* decompress = app.add_subcommand("decompress", "decode one bitstream");
  decompress->fallthrough();
  std::string d_in, d_model, d_si, d_out;
  decompress->add_option("-i,--input", d_in, "input bitstream")->required();
  decompress->add_option("-m,--model", d_model, "checkpoint")->required();
  decompress->add_option("--si", d_si, "side information PNG");
  decompress->add_option("-o,--out", d_out, "output PNG")->required();
  decompress->callback([&] {
    const Checkpoint ckpt = LoadCheckpoint(d_model);
    const ModelBundle model = ModelFromCheckpoint(ckpt);
    ImageF si;
    if (!d_si.empty()) si = LoadImageRgb(d_si);
    const DecompressResult res = DecompressFile(
        model, CheckpointHash(d_model), d_in, d_si.empty() ? nullptr : &si);
    WritePng(d_out, ToU8(res.image));
    std::printf("wrote %s: bpp_coded=%s, side_information=%s\n", d_out.c_str(),
                Fmt("%.8f", res.bpp_coded).c_str(),
                d_si.empty() ? "no" : "yes");
  });

  // eval
  auto* eval = app.add_subcommand("eval", "measure quality on pairs");
  eval->fallthrough();
  PairOpts eval_pairs_opt;
  std::string e_model;
  bool e_no_si = false;
  eval->add_option("-m,--model", e_model, "checkpoint")->required();
  eval->add_option("--manifest", eval_pairs_opt.manifest, "pair manifest file");
  eval->add_option("--pairs", eval_pairs_opt.synthetic,
                   "synthetic pair count when no manifest is given");
  eval->add_flag("--no-si", e_no_si, "decode without side information");
  eval->callback([&] {
    const RunConfig cfg = LoadConfig(g);
    const auto pairs = LoadPairs(g, eval_pairs_opt, cfg);
    const std::string run = PrepareRun(g, "eval", cfg, argc, argv);
    const Checkpoint ckpt = LoadCheckpoint(e_model);
    const PairsEvaluation ev = EvaluatePairs(
        ModelFromCheckpoint(ckpt), CheckpointHash(e_model), pairs,
        e_no_si ? DecodePath::kPlain : DecodePath::kFused, SiMode::kFull,
        (fs::path(run) / "bitstreams").string());
    WriteQualityReports((fs::path(run) / "tables" / "reports.jsonl").string(),
                        ev.reports);
    for (size_t i = 0; i < ev.reports.size(); ++i) {
      PrintMeanReport(("pair_" + std::to_string(i)).c_str(), ev.reports[i]);
    }
    PrintMeanReport("mean", ev.mean);
  });

  // rdcurve
  auto* rdcurve =
      app.add_subcommand("rdcurve", "train matched models and plot RD curves");
  rdcurve->fallthrough();
  PairOpts rd_pairs_opt;
  std::vector<double> rd_targets = {0.08, 0.15, 0.25};
  int rd_pre = 800, rd_joint = 700;
  rdcurve->add_option("--manifest", rd_pairs_opt.manifest,
                      "pair manifest file");
  rdcurve->add_option("--pairs", rd_pairs_opt.synthetic,
                      "synthetic pair count when no manifest is given");
  rdcurve->add_option("--targets", rd_targets, "target bpps");
  rdcurve->add_option("--pretrain-iters", rd_pre, "pretraining iterations");
  rdcurve->add_option("--joint-iters", rd_joint,
                      "joint (and matched baseline) iterations");
  rdcurve->callback([&] {
    const RunConfig cfg = LoadConfig(g);
    const auto pairs = LoadPairs(g, rd_pairs_opt, cfg);
    const std::string run = PrepareRun(g, "rdcurve", cfg, argc, argv);
    const RdComparison cmp =
        RunRdComparison(pairs, pairs, cfg, rd_targets, rd_pre, rd_joint,
                        (fs::path(run) / "bitstreams").string());
    WriteRdCurveTable((fs::path(run) / "tables" / "rd_with_si.tsv").string(),
                      cmp.with_si);
    WriteRdCurveTable((fs::path(run) / "tables" / "rd_no_si.tsv").string(),
                      cmp.no_si);
    std::vector<SvgSeries> series(2);
    series[0].label = "with side information";
    series[0].points = cmp.with_si.points;
    series[1].label = "no side information";
    series[1].points = cmp.no_si.points;
    for (SvgSeries& s : ExternalCodecCurves(
             pairs, (fs::path(run) / "bitstreams" / "external").string())) {
      series.push_back(std::move(s));
    }
    WriteRdCurveSvg((fs::path(run) / "figures" / "rd_curve.svg").string(),
                    "rate-distortion", series);
    std::printf("support=[%s,%s] min_gap=%s\n",
                Fmt("%.8f", cmp.with_si.support_lo).c_str(),
                Fmt("%.8f", cmp.with_si.support_hi).c_str(),
                Fmt("%.8f", MinCurveGap(cmp.with_si, cmp.no_si)).c_str());
    std::printf("tables and figures written under %s\n", run.c_str());
  });

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "correlation bands against side-information improvement");
  sweep->fallthrough();
  std::vector<std::string> sweep_bands = {"0.25:0.35", "0.55:0.65",
                                          "0.85:0.95"};
  std::vector<double> sweep_targets = {0.08, 0.15, 0.25};
  int sweep_bases = 2, sweep_pre = 800, sweep_joint = 700;
  sweep->add_option("--bands", sweep_bands, "correlation bands as lo:hi");
  sweep->add_option("--targets", sweep_targets, "target bpps");
  sweep->add_option("--bases", sweep_bases, "synthetic base image count");
  sweep->add_option("--pretrain-iters", sweep_pre, "pretraining iterations");
  sweep->add_option("--joint-iters", sweep_joint,
                    "joint (and matched baseline) iterations");
  sweep->callback([&] {
    const RunConfig cfg = LoadConfig(g);
    const std::string run = PrepareRun(g, "sweep", cfg, argc, argv);
    std::vector<ImageF> bases;
    for (int i = 0; i < sweep_bases; ++i) {
      bases.push_back(MakeBaseImage(
          cfg.data.eval_h, cfg.data.eval_w,
          Rng::Mix(cfg.train.seed, 0x62617365 + static_cast<uint64_t>(i))));
    }
    const SweepTable table = RunCorrelationSweep(
        bases, cfg, ParseBands(sweep_bands), sweep_targets, sweep_pre,
        sweep_joint, cfg.train.seed,
        (fs::path(run) / "bitstreams").string());
    WriteSweepTable((fs::path(run) / "tables" / "sweep.tsv").string(), table);
    std::vector<SvgSeries> series;
    for (size_t j = 0; j < table.target_bpps.size(); ++j) {
      SvgSeries s;
      s.label = "target_bpp=" + Fmt("%.3f", table.target_bpps[j]);
      for (size_t i = 0; i < table.bands.size(); ++i) {
        s.points.push_back({table.Cell(i, j).achieved_pearson,
                            table.Cell(i, j).improvement_pct});
      }
      series.push_back(std::move(s));
    }
    WriteXySvg((fs::path(run) / "figures" / "sweep.svg").string(),
               "correlation against side-information improvement",
               "average patch correlation", "MS-SSIM improvement (%)", series);
    for (const SweepCell& c : table.cells) {
      std::printf("band=[%s,%s] pearson=%s target_bpp=%s improvement=%s%%\n",
                  Fmt("%.3f", c.band_lo).c_str(),
                  Fmt("%.3f", c.band_hi).c_str(),
                  Fmt("%.6f", c.achieved_pearson).c_str(),
                  Fmt("%.3f", c.target_bpp).c_str(),
                  Fmt("%.6f", c.improvement_pct).c_str());
    }
    std::printf("improvement rank-increasing with correlation: %s\n",
                ImprovementRankIncreasing(table) ? "yes" : "no");
  });

  // ablate
  auto* ablate = app.add_subcommand("ablate", "paired ablation experiment");
  ablate->fallthrough();
  PairOpts ab_pairs_opt;
  std::string ab_kind;
  std::vector<double> ab_targets = {0.15};
  int ab_pre = 800, ab_joint = 700;
  ablate->add_option("--kind", ab_kind, "no_si_extra_layers, raw_y or no_mask")
      ->required();
  ablate->add_option("--manifest", ab_pairs_opt.manifest, "pair manifest file");
  ablate->add_option("--pairs", ab_pairs_opt.synthetic,
                     "synthetic pair count when no manifest is given");
  ablate->add_option("--targets", ab_targets, "target bpps");
  ablate->add_option("--pretrain-iters", ab_pre, "pretraining iterations");
  ablate->add_option("--joint-iters", ab_joint, "per-arm iterations");
  ablate->callback([&] {
    const RunConfig cfg = LoadConfig(g);
    const auto pairs = LoadPairs(g, ab_pairs_opt, cfg);
    const std::string run = PrepareRun(g, "ablate_" + ab_kind, cfg, argc, argv);
    std::string table = "# target_bpp\tbpp_baseline\tmsssim_baseline\t"
                        "bpp_ablated\tmsssim_ablated\tdelta_msssim\n";
    SvgSeries base_series, abl_series;
    base_series.label = "baseline";
    abl_series.label = ab_kind;
    for (size_t t = 0; t < ab_targets.size(); ++t) {
      RunConfig cell = cfg;
      cell.codec.target_bpp = ab_targets[t];
      char tag[32];
      std::snprintf(tag, sizeof(tag), "target%02zu", t);
      const AblationOutcome out =
          RunAblation(ab_kind, pairs, pairs, cell, ab_pre, ab_joint,
                      (fs::path(run) / "bitstreams" / tag).string());
      table += Fmt("%.6f", ab_targets[t]) + "\t" +
               Fmt("%.6f", out.baseline_mean.bpp_coded) + "\t" +
               Fmt("%.6f", out.baseline_mean.msssim) + "\t" +
               Fmt("%.6f", out.ablated_mean.bpp_coded) + "\t" +
               Fmt("%.6f", out.ablated_mean.msssim) + "\t" +
               Fmt("%.6f", out.delta_msssim) + "\n";
      base_series.points.push_back(
          {out.baseline_mean.bpp_coded, out.baseline_mean.msssim});
      abl_series.points.push_back(
          {out.ablated_mean.bpp_coded, out.ablated_mean.msssim});
      std::printf("target_bpp=%s delta_msssim=%s\n",
                  Fmt("%.3f", ab_targets[t]).c_str(),
                  Fmt("%.8f", out.delta_msssim).c_str());
    }
    WriteText(
        (fs::path(run) / "tables" / ("ablate_" + ab_kind + ".tsv")).string(),
        table);
    WriteRdCurveSvg(
        (fs::path(run) / "figures" / ("ablate_" + ab_kind + ".svg")).string(),
        "ablation: " + ab_kind, {base_series, abl_series});
  });

  // toy-coset
  auto* toy = app.add_subcommand(
      "toy-coset", "replay the pixel coset example and exhaustive check");
  toy->fallthrough();
  toy->callback([&] { g_exit = RunToyCoset(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return g_exit;
}
