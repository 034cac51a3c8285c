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

#include "dsin/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dsin/autodiff.h"
#include "dsin/base.h"
#include "dsin/codec.h"
#include "dsin/container.h"
#include "dsin/data_pairs.h"
#include "dsin/internal/config_json.h"
#include "dsin/rng.h"
#include "dsin/si_finder.h"
#include "dsin/si_net.h"
#include "dsin/tensor.h"
#include "json.hpp"

namespace dsin {
namespace {

namespace fs = std::filesystem;

std::string FormatDouble(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return std::string(buf);
}

std::string ImageName(const std::vector<std::string>& names, size_t idx) {
  if (idx < names.size() && !names[idx].empty()) return names[idx];
  return "image " + std::to_string(idx);
}

// Sorts by rate and merges points that landed on exactly the same rate by
// averaging their quality, so the curve is a function of bpp.
std::vector<RdPoint> CanonicalCurve(const std::vector<RdPoint>& points) {
  std::vector<RdPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RdPoint& a, const RdPoint& b) {
                     return a.bpp < b.bpp;
                   });
  std::vector<RdPoint> merged;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    double sum = 0.0;
    while (j < sorted.size() && sorted[j].bpp == sorted[i].bpp) {
      sum += sorted[j].msssim;
      ++j;
    }
    merged.push_back({sorted[i].bpp, sum / static_cast<double>(j - i)});
    i = j;
  }
  return merged;
}

ImageF FuseWithMosaic(const ModelBundle& model, const ImageF& x_dec,
                      const ImageF& mosaic) {
  ad::NoGradGuard guard;
  ad::Var fused =
      SiNetFuse(model.si_net, model.params, ad::Constant(FromImage(x_dec)),
                ad::Constant(FromImage(mosaic)));
  return ClampUnit(ToImage(fused->value));
}

// Mosaic the deployed decoder would assemble, reproduced outside the
// container so its correlation with the original can be measured.
ImageF DeployedMosaic(const ModelBundle& model, const ImageF& x_dec,
                      const ImageF& y) {
  ad::NoGradGuard guard;
  const LatentGrid si_grid = EncodeImage(model.codec, model.params, y);
  const ImageF y_dec = DecodeImage(model.codec, model.params, si_grid);
  const PatchAssignment f = FindAssignment(x_dec, y_dec, model.matcher);
  return AssembleYsyn(y, f);
}

// Saves the checkpoint under the run directory and returns the digest the
// bitstream headers will carry, mirroring the deployment flow.
Sha256Digest SaveAndHash(const Checkpoint& ckpt, const std::string& dir,
                         const std::string& name) {
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  SaveCheckpoint(path, ckpt);
  return CheckpointHash(path);
}

std::string CellDir(const std::string& scratch, size_t band, size_t bpp) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "band%02zu_bpp%02zu", band, bpp);
  return (fs::path(scratch) / buf).string();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  if (!fs::path(path).parent_path().empty()) {
    fs::create_directories(fs::path(path).parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  DSIN_REQUIRE(out.good(), "cannot open for writing: " + path);
  out << text;
  out.flush();
  DSIN_CHECK(out.good(), "short write: " + path);
}

std::string EscapeXml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

double InterpolateAt(const std::vector<RdPoint>& points, double bpp) {
  DSIN_REQUIRE(!points.empty(), "InterpolateAt: empty curve");
  for (size_t i = 1; i < points.size(); ++i) {
    DSIN_REQUIRE(points[i - 1].bpp < points[i].bpp,
                 "InterpolateAt: points must be sorted with distinct rates");
  }
  DSIN_REQUIRE(bpp >= points.front().bpp && bpp <= points.back().bpp,
               "InterpolateAt: rate " + FormatDouble("%.6f", bpp) +
                   " outside curve support");
  auto it = std::lower_bound(
      points.begin(), points.end(), bpp,
      [](const RdPoint& p, double v) { return p.bpp < v; });
  if (it->bpp == bpp) return it->msssim;
  const RdPoint& hi = *it;
  const RdPoint& lo = *(it - 1);
  const double t = (bpp - lo.bpp) / (hi.bpp - lo.bpp);
  return lo.msssim + t * (hi.msssim - lo.msssim);
}

RdCurve RdAverage(const std::vector<std::vector<RdPoint>>& per_image,
                  const std::vector<std::string>& image_names) {
  DSIN_REQUIRE(!per_image.empty(), "RdAverage: no per-image curves");

  std::vector<std::vector<RdPoint>> curves(per_image.size());
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  size_t lo_image = 0, hi_image = 0;
  for (size_t i = 0; i < per_image.size(); ++i) {
    curves[i] = CanonicalCurve(per_image[i]);
    DSIN_REQUIRE(curves[i].size() >= 2,
                 "RdAverage: " + ImageName(image_names, i) +
                     " has fewer than two distinct-rate points");
    if (curves[i].front().bpp > lo) {
      lo = curves[i].front().bpp;
      lo_image = i;
    }
    if (curves[i].back().bpp < hi) {
      hi = curves[i].back().bpp;
      hi_image = i;
    }
  }
  DSIN_REQUIRE(lo <= hi,
               "RdAverage: curves share no rate range; " +
                   ImageName(image_names, lo_image) + " starts at " +
                   FormatDouble("%.6f", lo) + " bpp but " +
                   ImageName(image_names, hi_image) + " ends at " +
                   FormatDouble("%.6f", hi) + " bpp");

  RdCurve result;
  result.support_lo = lo;
  result.support_hi = hi;
  const int grid = lo == hi ? 1 : kRdGridPoints;
  const double count = static_cast<double>(per_image.size());
  for (int g = 0; g < grid; ++g) {
    double bpp = grid == 1
                     ? lo
                     : lo + (hi - lo) * static_cast<double>(g) / (grid - 1);
    bpp = std::min(std::max(bpp, lo), hi);
    if (g == grid - 1) bpp = hi;
    // Summing in value order keeps the result independent of the order the
    // images were given in.
    std::vector<double> vals;
    vals.reserve(curves.size());
    for (const auto& curve : curves) vals.push_back(InterpolateAt(curve, bpp));
    std::sort(vals.begin(), vals.end());
    double sum = 0.0;
    for (double v : vals) sum += v;
    result.points.push_back({bpp, sum / count});
  }
  return result;
}

double MinCurveGap(const RdCurve& a, const RdCurve& b) {
  DSIN_REQUIRE(!a.points.empty() && !b.points.empty(),
               "MinCurveGap: empty curve");
  const double lo = std::max(a.points.front().bpp, b.points.front().bpp);
  const double hi = std::min(a.points.back().bpp, b.points.back().bpp);
  DSIN_REQUIRE(lo <= hi, "MinCurveGap: curves share no rate range");
  double min_gap = std::numeric_limits<double>::infinity();
  const int grid = lo == hi ? 1 : kRdGridPoints;
  for (int g = 0; g < grid; ++g) {
    double bpp = grid == 1
                     ? lo
                     : lo + (hi - lo) * static_cast<double>(g) / (grid - 1);
    bpp = std::min(std::max(bpp, lo), hi);
    if (g == grid - 1) bpp = hi;
    min_gap = std::min(min_gap,
                       InterpolateAt(a.points, bpp) - InterpolateAt(b.points, bpp));
  }
  return min_gap;
}

std::string QualityReportToJson(const QualityReport& report) {
  nlohmann::json j;
  j["msssim"] = report.msssim;
  j["l1"] = report.l1;
  j["psnr"] = report.psnr;
  j["bpp_estimated"] = report.bpp_estimated;
  j["bpp_coded"] = report.bpp_coded;
  return j.dump();
}

QualityReport QualityReportFromJson(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("quality report is not valid JSON: ") +
                      e.what());
  }
  QualityReport r;
  try {
    r.msssim = j.at("msssim").get<double>();
    r.l1 = j.at("l1").get<double>();
    r.psnr = j.at("psnr").get<double>();
    r.bpp_estimated = j.at("bpp_estimated").get<double>();
    r.bpp_coded = j.at("bpp_coded").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("quality report is missing a field: ") +
                      e.what());
  }
  return r;
}

void WriteQualityReports(const std::string& path,
                         const std::vector<QualityReport>& reports) {
  std::string text;
  for (const QualityReport& r : reports) {
    text += QualityReportToJson(r);
    text += '\n';
  }
  WriteTextFile(path, text);
}

std::vector<QualityReport> ReadQualityReports(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  DSIN_REQUIRE(in.good(), "cannot open quality report log: " + path);
  std::vector<QualityReport> reports;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      reports.push_back(QualityReportFromJson(line));
    } catch (const DomainError& e) {
      throw DomainError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return reports;
}

PairsEvaluation EvaluatePairs(const ModelBundle& model,
                              const Sha256Digest& model_hash,
                              const std::vector<std::pair<ImageF, ImageF>>& pairs,
                              DecodePath path, SiMode si_mode,
                              const std::string& scratch_dir) {
  DSIN_REQUIRE(!pairs.empty(), "EvaluatePairs: no pairs");
  fs::create_directories(scratch_dir);

  PairsEvaluation ev;
  double pearson_sum = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const ImageF& x = pairs[i].first;
    const ImageF& y = pairs[i].second;
    char name[32];
    std::snprintf(name, sizeof(name), "eval_%03zu.dsin", i);
    const std::string bitstream = (fs::path(scratch_dir) / name).string();

    const CompressResult comp = CompressFile(model, model_hash, x, bitstream);
    ImageF out;
    if (path == DecodePath::kPlain) {
      out = DecompressFile(model, model_hash, bitstream, nullptr).image;
    } else if (si_mode == SiMode::kFull) {
      const DecompressResult dec =
          DecompressFile(model, model_hash, bitstream, &y);
      out = dec.image;
      const ImageF mosaic = DeployedMosaic(model, dec.x_dec, y);
      pearson_sum += AvgPatchPearson(x, mosaic, model.matcher.patch_h,
                                     model.matcher.patch_w);
    } else {
      const DecompressResult dec =
          DecompressFile(model, model_hash, bitstream, nullptr);
      ImageF mosaic;
      if (si_mode == SiMode::kZeroYsyn) {
        mosaic = ImageF(dec.x_dec.h, dec.x_dec.w, dec.x_dec.c);
      } else {
        DSIN_REQUIRE(y.h == dec.x_dec.h && y.w == dec.x_dec.w,
                     "raw side fusion needs matching image dimensions");
        mosaic = y;
      }
      out = FuseWithMosaic(model, dec.x_dec, mosaic);
    }

    QualityReport r;
    r.msssim = MsSsim(x, out);
    r.l1 = L1Distance(x, out);
    r.psnr = Psnr(x, out);
    r.bpp_estimated = comp.bpp_estimated;
    r.bpp_coded = comp.bpp_coded;
    ev.reports.push_back(r);

    ev.mean.msssim += r.msssim;
    ev.mean.l1 += r.l1;
    ev.mean.psnr += r.psnr;
    ev.mean.bpp_estimated += r.bpp_estimated;
    ev.mean.bpp_coded += r.bpp_coded;
  }
  const double inv = 1.0 / static_cast<double>(pairs.size());
  ev.mean.msssim *= inv;
  ev.mean.l1 *= inv;
  ev.mean.psnr *= inv;
  ev.mean.bpp_estimated *= inv;
  ev.mean.bpp_coded *= inv;
  if (path == DecodePath::kFused && si_mode == SiMode::kFull) {
    ev.mean_mosaic_pearson = pearson_sum * inv;
  }
  return ev;
}

MatchedModels TrainMatchedModels(
    const std::vector<std::pair<ImageF, ImageF>>& train_pairs,
    const RunConfig& cfg, int pretrain_iters, int joint_iters,
    SiMode si_mode) {
  DSIN_REQUIRE(pretrain_iters >= 1 && joint_iters >= 1,
               "TrainMatchedModels: iteration budgets must be >= 1");

  RunConfig pre = cfg;
  pre.train.stage = "pretrain";
  pre.train.iterations = pretrain_iters;
  TrainResult pre_res = TrainStage(train_pairs, pre, nullptr);

  RunConfig joint = cfg;
  joint.train.stage = "joint";
  joint.train.iterations = joint_iters;
  TrainResult with_res =
      TrainStage(train_pairs, joint, &pre_res.checkpoint, si_mode);

  // The plain arm spends the same number of extra updates on the
  // pretraining objective so both arms see equal compute.
  RunConfig cont = cfg;
  cont.train.stage = "pretrain";
  cont.train.iterations = joint_iters;
  TrainResult no_res = TrainStage(train_pairs, cont, &pre_res.checkpoint);

  MatchedModels out;
  out.with_si = std::move(with_res.checkpoint);
  out.no_si = std::move(no_res.checkpoint);
  out.target_bpp = cfg.codec.target_bpp;
  out.pretrain_log = std::move(pre_res.log);
  out.with_si_log = std::move(with_res.log);
  out.no_si_log = std::move(no_res.log);
  return out;
}

RdComparison RunRdComparison(
    const std::vector<std::pair<ImageF, ImageF>>& train_pairs,
    const std::vector<std::pair<ImageF, ImageF>>& eval_pairs,
    const RunConfig& cfg, const std::vector<double>& target_bpps,
    int pretrain_iters, int joint_iters, const std::string& scratch_dir) {
  DSIN_REQUIRE(target_bpps.size() >= 2,
               "RunRdComparison: need at least two target rates for a curve");
  DSIN_REQUIRE(!eval_pairs.empty(), "RunRdComparison: no evaluation pairs");

  RdComparison cmp;
  cmp.per_image_with.resize(eval_pairs.size());
  cmp.per_image_no.resize(eval_pairs.size());
  std::vector<std::string> with_labels, no_labels;

  for (size_t m = 0; m < target_bpps.size(); ++m) {
    RunConfig cell_cfg = cfg;
    cell_cfg.codec.target_bpp = target_bpps[m];
    MatchedModels models =
        TrainMatchedModels(train_pairs, cell_cfg, pretrain_iters, joint_iters);

    char tag[32];
    std::snprintf(tag, sizeof(tag), "model%02zu", m);
    const std::string model_dir = (fs::path(scratch_dir) / tag).string();
    const Sha256Digest with_hash =
        SaveAndHash(models.with_si, model_dir, "with_si.dsck");
    const Sha256Digest no_hash =
        SaveAndHash(models.no_si, model_dir, "no_si.dsck");

    const PairsEvaluation ev_with = EvaluatePairs(
        ModelFromCheckpoint(models.with_si), with_hash, eval_pairs,
        DecodePath::kFused, SiMode::kFull,
        (fs::path(model_dir) / "with_si").string());
    const PairsEvaluation ev_no = EvaluatePairs(
        ModelFromCheckpoint(models.no_si), no_hash, eval_pairs,
        DecodePath::kPlain, SiMode::kFull,
        (fs::path(model_dir) / "no_si").string());
    WriteQualityReports((fs::path(model_dir) / "with_si_reports.jsonl").string(),
                        ev_with.reports);
    WriteQualityReports((fs::path(model_dir) / "no_si_reports.jsonl").string(),
                        ev_no.reports);

    for (size_t i = 0; i < eval_pairs.size(); ++i) {
      cmp.per_image_with[i].push_back(
          {ev_with.reports[i].bpp_coded, ev_with.reports[i].msssim});
      cmp.per_image_no[i].push_back(
          {ev_no.reports[i].bpp_coded, ev_no.reports[i].msssim});
    }
    const std::string target = FormatDouble("%.4f", target_bpps[m]);
    with_labels.push_back("with_si target_bpp=" + target);
    no_labels.push_back("no_si target_bpp=" + target);
    cmp.models.push_back(std::move(models));
  }

  std::vector<std::string> pair_names;
  for (size_t i = 0; i < eval_pairs.size(); ++i) {
    pair_names.push_back("pair " + std::to_string(i));
  }
  cmp.with_si = RdAverage(cmp.per_image_with, pair_names);
  cmp.with_si.provenance = with_labels;
  cmp.no_si = RdAverage(cmp.per_image_no, pair_names);
  cmp.no_si.provenance = no_labels;
  return cmp;
}

const SweepCell& SweepTable::Cell(size_t band_idx, size_t bpp_idx) const {
  DSIN_REQUIRE(band_idx < bands.size() && bpp_idx < target_bpps.size(),
               "SweepTable::Cell: index out of range");
  return cells[band_idx * target_bpps.size() + bpp_idx];
}

bool ImprovementRankIncreasing(const SweepTable& table) {
  DSIN_REQUIRE(table.cells.size() == table.bands.size() * table.target_bpps.size(),
               "ImprovementRankIncreasing: incomplete table");
  for (size_t j = 0; j < table.target_bpps.size(); ++j) {
    for (size_t i = 1; i < table.bands.size(); ++i) {
      if (!(table.Cell(i, j).improvement_pct >
            table.Cell(i - 1, j).improvement_pct)) {
        return false;
      }
    }
  }
  return true;
}

SweepTable RunCorrelationSweep(
    const std::vector<ImageF>& bases, const RunConfig& cfg,
    const std::vector<std::pair<double, double>>& bands,
    const std::vector<double>& target_bpps, int pretrain_iters,
    int joint_iters, uint64_t seed, const std::string& scratch_dir) {
  DSIN_REQUIRE(!bases.empty(), "RunCorrelationSweep: no base images");
  DSIN_REQUIRE(!bands.empty() && !target_bpps.empty(),
               "RunCorrelationSweep: empty band or rate list");
  for (size_t i = 0; i < bands.size(); ++i) {
    DSIN_REQUIRE(bands[i].first > 0.0 && bands[i].first < bands[i].second &&
                     bands[i].second <= 1.0,
                 "RunCorrelationSweep: bad correlation band");
    if (i > 0) {
      DSIN_REQUIRE(bands[i - 1].first + bands[i - 1].second <
                       bands[i].first + bands[i].second,
                   "RunCorrelationSweep: bands must increase");
    }
  }

  SweepTable table;
  table.bands = bands;
  table.target_bpps = target_bpps;

  for (size_t bi = 0; bi < bands.size(); ++bi) {
    PairSpec spec = cfg.data;
    spec.corr_lo = bands[bi].first;
    spec.corr_hi = bands[bi].second;
    std::vector<std::pair<ImageF, ImageF>> pairs;
    for (size_t k = 0; k < bases.size(); ++k) {
      const uint64_t pair_seed =
          Rng::Mix(Rng::Mix(seed, 0x62616e64 + bi), 0x62617365 + k);
      SynthPair sp = MakeSynthPair(bases[k], spec, pair_seed);
      pairs.emplace_back(std::move(sp.x), std::move(sp.y));
    }

    for (size_t mj = 0; mj < target_bpps.size(); ++mj) {
      RunConfig cell_cfg = cfg;
      cell_cfg.codec.target_bpp = target_bpps[mj];
      MatchedModels models =
          TrainMatchedModels(pairs, cell_cfg, pretrain_iters, joint_iters);

      const std::string cell_dir = CellDir(scratch_dir, bi, mj);
      const Sha256Digest with_hash =
          SaveAndHash(models.with_si, cell_dir, "with_si.dsck");
      const Sha256Digest no_hash =
          SaveAndHash(models.no_si, cell_dir, "no_si.dsck");

      const PairsEvaluation ev_with = EvaluatePairs(
          ModelFromCheckpoint(models.with_si), with_hash, pairs,
          DecodePath::kFused, SiMode::kFull,
          (fs::path(cell_dir) / "with_si").string());
      const PairsEvaluation ev_no = EvaluatePairs(
          ModelFromCheckpoint(models.no_si), no_hash, pairs,
          DecodePath::kPlain, SiMode::kFull,
          (fs::path(cell_dir) / "no_si").string());
      WriteQualityReports(
          (fs::path(cell_dir) / "with_si_reports.jsonl").string(),
          ev_with.reports);
      WriteQualityReports(
          (fs::path(cell_dir) / "no_si_reports.jsonl").string(),
          ev_no.reports);

      SweepCell cell;
      cell.band_lo = bands[bi].first;
      cell.band_hi = bands[bi].second;
      cell.achieved_pearson = ev_with.mean_mosaic_pearson;
      cell.target_bpp = target_bpps[mj];
      cell.bpp_with = ev_with.mean.bpp_coded;
      cell.bpp_without = ev_no.mean.bpp_coded;
      cell.msssim_with = ev_with.mean.msssim;
      cell.msssim_without = ev_no.mean.msssim;
      cell.improvement_pct =
          ImprovementRatio(ev_with.mean.msssim, ev_no.mean.msssim);
      table.cells.push_back(cell);
    }
  }
  return table;
}

void RequireAblationCompatible(const std::string& kind,
                               const RunConfig& baseline,
                               const RunConfig& ablated) {
  bool known = false;
  for (const char* k : kAblationKinds) known = known || kind == k;
  DSIN_REQUIRE(known, "unknown ablation kind: " + kind);

  RunConfig neutral = ablated;
  if (kind == "no_mask") {
    neutral.matcher.mask_enabled = baseline.matcher.mask_enabled;
  }
  DSIN_REQUIRE(
      RunConfigToJsonText(neutral) == RunConfigToJsonText(baseline),
      "ablation " + kind + " must leave every other setting unchanged");
}

AblationOutcome RunAblation(
    const std::string& kind,
    const std::vector<std::pair<ImageF, ImageF>>& train_pairs,
    const std::vector<std::pair<ImageF, ImageF>>& eval_pairs,
    const RunConfig& cfg, int pretrain_iters, int joint_iters,
    const std::string& scratch_dir) {
  DSIN_REQUIRE(!eval_pairs.empty(), "RunAblation: no evaluation pairs");
  RunConfig ablated_cfg = cfg;
  if (kind == "no_mask") ablated_cfg.matcher.mask_enabled = false;
  RequireAblationCompatible(kind, cfg, ablated_cfg);

  // One shared pretraining run keeps the arms on identical starting weights.
  RunConfig pre = cfg;
  pre.train.stage = "pretrain";
  pre.train.iterations = pretrain_iters;
  TrainResult pre_res = TrainStage(train_pairs, pre, nullptr);

  auto continue_from_pre = [&](const RunConfig& run_cfg,
                               const std::string& stage,
                               SiMode mode) -> Checkpoint {
    RunConfig c = run_cfg;
    c.train.stage = stage;
    c.train.iterations = joint_iters;
    return TrainStage(train_pairs, c, &pre_res.checkpoint, mode).checkpoint;
  };

  Checkpoint baseline_ckpt, ablated_ckpt;
  DecodePath baseline_path = DecodePath::kFused;
  SiMode baseline_mode = SiMode::kFull;
  SiMode ablated_mode = SiMode::kFull;
  if (kind == "no_si_extra_layers") {
    baseline_ckpt = continue_from_pre(cfg, "pretrain", SiMode::kFull);
    baseline_path = DecodePath::kPlain;
    ablated_ckpt = continue_from_pre(cfg, "joint", SiMode::kZeroYsyn);
    ablated_mode = SiMode::kZeroYsyn;
  } else if (kind == "raw_y") {
    baseline_ckpt = continue_from_pre(cfg, "joint", SiMode::kFull);
    ablated_ckpt = continue_from_pre(cfg, "joint", SiMode::kRawY);
    ablated_mode = SiMode::kRawY;
  } else {
    baseline_ckpt = continue_from_pre(cfg, "joint", SiMode::kFull);
    ablated_ckpt = continue_from_pre(ablated_cfg, "joint", SiMode::kFull);
  }

  const std::string base_dir = (fs::path(scratch_dir) / "baseline").string();
  const std::string abl_dir = (fs::path(scratch_dir) / "ablated").string();
  const Sha256Digest base_hash =
      SaveAndHash(baseline_ckpt, base_dir, "model.dsck");
  const Sha256Digest abl_hash = SaveAndHash(ablated_ckpt, abl_dir, "model.dsck");

  const PairsEvaluation ev_base =
      EvaluatePairs(ModelFromCheckpoint(baseline_ckpt), base_hash, eval_pairs,
                    baseline_path, baseline_mode, base_dir);
  const PairsEvaluation ev_abl =
      EvaluatePairs(ModelFromCheckpoint(ablated_ckpt), abl_hash, eval_pairs,
                    DecodePath::kFused, ablated_mode, abl_dir);
  WriteQualityReports((fs::path(base_dir) / "reports.jsonl").string(),
                      ev_base.reports);
  WriteQualityReports((fs::path(abl_dir) / "reports.jsonl").string(),
                      ev_abl.reports);

  AblationOutcome out;
  out.kind = kind;
  out.baseline_mean = ev_base.mean;
  out.ablated_mean = ev_abl.mean;
  out.delta_msssim = ev_abl.mean.msssim - ev_base.mean.msssim;
  return out;
}

std::string MakeRunDir(const std::string& root, const std::string& name) {
  const fs::path run = fs::path(root) / name;
  fs::create_directories(run / "logs");
  fs::create_directories(run / "tables");
  fs::create_directories(run / "figures");
  fs::create_directories(run / "bitstreams");
  return run.string();
}

void WriteRdCurveTable(const std::string& path, const RdCurve& curve) {
  std::string text = "# bpp\tmsssim\n";
  for (const RdPoint& p : curve.points) {
    text += FormatDouble("%.8f", p.bpp) + "\t" +
            FormatDouble("%.8f", p.msssim) + "\n";
  }
  WriteTextFile(path, text);
}

void WriteSweepTable(const std::string& path, const SweepTable& table) {
  std::string text =
      "# band_lo\tband_hi\tpearson\ttarget_bpp\tbpp_with\tbpp_without\t"
      "msssim_with\tmsssim_without\timprovement_pct\n";
  for (const SweepCell& c : table.cells) {
    text += FormatDouble("%.6f", c.band_lo) + "\t" +
            FormatDouble("%.6f", c.band_hi) + "\t" +
            FormatDouble("%.6f", c.achieved_pearson) + "\t" +
            FormatDouble("%.6f", c.target_bpp) + "\t" +
            FormatDouble("%.6f", c.bpp_with) + "\t" +
            FormatDouble("%.6f", c.bpp_without) + "\t" +
            FormatDouble("%.6f", c.msssim_with) + "\t" +
            FormatDouble("%.6f", c.msssim_without) + "\t" +
            FormatDouble("%.6f", c.improvement_pct) + "\n";
  }
  WriteTextFile(path, text);
}

void WriteXySvg(const std::string& path, const std::string& title,
                const std::string& x_label, const std::string& y_label,
                const std::vector<SvgSeries>& series) {
  DSIN_REQUIRE(!series.empty(), "WriteXySvg: no series");
  for (const SvgSeries& s : series) {
    DSIN_REQUIRE(!s.points.empty(), "WriteXySvg: empty series");
  }
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr int kW = 860, kH = 540;
  constexpr double kLeft = 80, kRight = 30, kTop = 50, kBottom = 65;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const SvgSeries& s : series) {
    for (const RdPoint& p : s.points) {
      x_min = std::min(x_min, p.bpp);
      x_max = std::max(x_max, p.bpp);
      y_min = std::min(y_min, p.msssim);
      y_max = std::max(y_max, p.msssim);
    }
  }
  auto pad_range = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double pad = span > 0.0 ? 0.05 * span : 0.05;
    lo -= pad;
    hi += pad;
  };
  pad_range(x_min, x_max);
  pad_range(y_min, y_max);
  auto sx = [&](double v) {
    return kLeft + (v - x_min) / (x_max - x_min) * plot_w;
  };
  auto sy = [&](double v) {
    return kTop + plot_h - (v - y_min) / (y_max - y_min) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n";
  svg << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"18\">"
      << EscapeXml(title) << "</text>\n";

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double fx = x_min + (x_max - x_min) * t / kTicks;
    const double fy = y_min + (y_max - y_min) * t / kTicks;
    const double px = sx(fx);
    const double py = sy(fy);
    svg << "<line x1=\"" << px << "\" y1=\"" << kTop << "\" x2=\"" << px
        << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << py << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << py
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << px << "\" y=\"" << kTop + plot_h + 22
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << FormatDouble("%.3f", fx) << "</text>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << FormatDouble("%.3f", fy) << "</text>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << EscapeXml(x_label) << "</text>\n";
  svg << "<text x=\"22\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" transform=\"rotate(-90 22 "
      << kTop + plot_h / 2 << ")\">" << EscapeXml(y_label) << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % (sizeof(kPalette) / sizeof(*kPalette))]
                        : s.color;
    std::vector<RdPoint> pts = CanonicalCurve(s.points);
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const RdPoint& p : pts) {
      svg << sx(p.bpp) << "," << sy(p.msssim) << " ";
    }
    svg << "\"/>\n";
    for (const RdPoint& p : pts) {
      svg << "<circle cx=\"" << sx(p.bpp) << "\" cy=\"" << sy(p.msssim)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 16 + 20 * static_cast<double>(si);
    const double lx = kLeft + plot_w - 190;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\""
        << lx + 26 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << lx + 32 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"13\">"
        << EscapeXml(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  WriteTextFile(path, svg.str());
}

void WriteRdCurveSvg(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series) {
  WriteXySvg(path, title, "bits per pixel", "MS-SSIM", series);
}

}  // namespace dsin
