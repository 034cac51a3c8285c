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

#ifndef DSIN_EVAL_H_
#define DSIN_EVAL_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dsin/checkpoint.h"
#include "dsin/image.h"
#include "dsin/metrics.h"
#include "dsin/run_config.h"
#include "dsin/sha256.h"
#include "dsin/training.h"

namespace dsin {

// Number of samples on the shared bpp grid used when averaging or comparing
// rate-distortion curves.
inline constexpr int kRdGridPoints = 200;

struct RdPoint {
  double bpp = 0.0;
  double msssim = 0.0;

  friend bool operator==(const RdPoint& a, const RdPoint& b) {
    return a.bpp == b.bpp && a.msssim == b.msssim;
  }
};

struct RdCurve {
  std::vector<RdPoint> points;          // sorted by bpp, strictly increasing
  std::vector<std::string> provenance;  // identifiers of contributing models
  double support_lo = 0.0;              // bpp range the curve is valid on
  double support_hi = 0.0;
};

// Value of a piecewise-linear curve at `bpp`. Points must be sorted with
// strictly increasing bpp; querying outside [front, back] throws.
double InterpolateAt(const std::vector<RdPoint>& points, double bpp);

// Averages one measured curve per image into a single curve on a common
// kRdGridPoints grid. Each image needs at least two distinct-rate points
// after exact-duplicate bpps are merged by averaging their quality. The grid
// spans the intersection of the per-image supports; an empty intersection
// throws and names the images at both extremes. `image_names` labels images
// in errors; empty means positional names are generated. The result does not
// depend on the order the images are given in.
RdCurve RdAverage(const std::vector<std::vector<RdPoint>>& per_image,
                  const std::vector<std::string>& image_names = {});

// Smallest value of a(bpp) - b(bpp) over a kRdGridPoints grid spanning the
// intersection of the two supports. Positive means `a` dominates `b` on the
// whole shared range. Empty intersection throws.
double MinCurveGap(const RdCurve& a, const RdCurve& b);

// One line of JSON per report; the reader rejects malformed lines and
// missing fields.
std::string QualityReportToJson(const QualityReport& report);
QualityReport QualityReportFromJson(const std::string& line);
void WriteQualityReports(const std::string& path,
                         const std::vector<QualityReport>& reports);
std::vector<QualityReport> ReadQualityReports(const std::string& path);

// How the decode side reconstructs during evaluation. kPlain stops at the
// base decoder output; kFused runs the fusion stage with the mosaic dictated
// by SiMode.
enum class DecodePath { kPlain, kFused };

struct PairsEvaluation {
  std::vector<QualityReport> reports;  // one per pair, in input order
  QualityReport mean;                  // field-wise arithmetic mean
  double mean_mosaic_pearson = 0.0;    // x vs assembled mosaic; kFull fused only
};

// Compresses each pair's primary image to `<scratch_dir>/eval_NNN.dsin`,
// decodes it back through the requested path, and measures quality against
// the original. Bitstream files are left in place for inspection.
PairsEvaluation EvaluatePairs(const ModelBundle& model,
                              const Sha256Digest& model_hash,
                              const std::vector<std::pair<ImageF, ImageF>>& pairs,
                              DecodePath path, SiMode si_mode,
                              const std::string& scratch_dir);

// Side-informed model and its matched plain baseline for one target rate.
// Both continue from the same pretrained weights; the baseline spends the
// same number of extra updates on the pretraining objective so the arms are
// compute-matched.
struct MatchedModels {
  Checkpoint with_si;
  Checkpoint no_si;
  double target_bpp = 0.0;
  std::vector<MetricsRow> pretrain_log;
  std::vector<MetricsRow> with_si_log;
  std::vector<MetricsRow> no_si_log;
};

MatchedModels TrainMatchedModels(
    const std::vector<std::pair<ImageF, ImageF>>& train_pairs,
    const RunConfig& cfg, int pretrain_iters, int joint_iters,
    SiMode si_mode = SiMode::kFull);

struct RdComparison {
  RdCurve with_si;
  RdCurve no_si;
  std::vector<MatchedModels> models;               // one per target bpp
  std::vector<std::vector<RdPoint>> per_image_with;  // [image][model]
  std::vector<std::vector<RdPoint>> per_image_no;
};

// Trains matched model pairs at each target rate, evaluates both arms on
// `eval_pairs`, and averages the per-image measurements into two curves.
RdComparison RunRdComparison(
    const std::vector<std::pair<ImageF, ImageF>>& train_pairs,
    const std::vector<std::pair<ImageF, ImageF>>& eval_pairs,
    const RunConfig& cfg, const std::vector<double>& target_bpps,
    int pretrain_iters, int joint_iters, const std::string& scratch_dir);

struct SweepCell {
  double band_lo = 0.0;  // requested correlation band
  double band_hi = 0.0;
  double achieved_pearson = 0.0;  // x vs mosaic, averaged over eval pairs
  double target_bpp = 0.0;
  double bpp_with = 0.0;
  double bpp_without = 0.0;
  double msssim_with = 0.0;
  double msssim_without = 0.0;
  double improvement_pct = 0.0;
};

struct SweepTable {
  std::vector<std::pair<double, double>> bands;  // low to high correlation
  std::vector<double> target_bpps;
  std::vector<SweepCell> cells;  // band-major: bands.size() * bpps.size()

  const SweepCell& Cell(size_t band_idx, size_t bpp_idx) const;
};

// True when, at every target rate, the quality improvement from side
// information strictly increases with the achieved pair correlation.
bool ImprovementRankIncreasing(const SweepTable& table);

// For each correlation band, synthesizes pairs from the base images, trains
// matched models at each target rate, and records correlation against
// improvement. Bands must be given in increasing order of their centers and
// every (band, bpp) combination is trained, so the table is complete by
// construction.
SweepTable RunCorrelationSweep(
    const std::vector<ImageF>& bases, const RunConfig& cfg,
    const std::vector<std::pair<double, double>>& bands,
    const std::vector<double>& target_bpps, int pretrain_iters,
    int joint_iters, uint64_t seed, const std::string& scratch_dir);

// Ablation arms. no_si_extra_layers keeps the fusion layers but feeds them a
// zero mosaic and is judged against the plain baseline; raw_y fuses the
// unaligned side image and no_mask disables the distance weighting in the
// patch search, both judged against the full side-informed model.
inline constexpr const char* kAblationKinds[] = {"no_si_extra_layers", "raw_y",
                                                 "no_mask"};

// Throws unless the two configs are identical apart from the one component
// the ablation kind is allowed to change (only no_mask touches the config;
// the other kinds must leave it untouched).
void RequireAblationCompatible(const std::string& kind,
                               const RunConfig& baseline,
                               const RunConfig& ablated);

struct AblationOutcome {
  std::string kind;
  QualityReport baseline_mean;
  QualityReport ablated_mean;
  double delta_msssim = 0.0;  // ablated minus baseline
};

// Trains the baseline and ablated arms from one shared pretrained
// checkpoint, equal update counts, differing only in the ablated component,
// then evaluates both on `eval_pairs`.
AblationOutcome RunAblation(
    const std::string& kind,
    const std::vector<std::pair<ImageF, ImageF>>& train_pairs,
    const std::vector<std::pair<ImageF, ImageF>>& eval_pairs,
    const RunConfig& cfg, int pretrain_iters, int joint_iters,
    const std::string& scratch_dir);

// Creates `<root>/<name>` with logs/, tables/, figures/ and bitstreams/
// subdirectories and returns the run path.
std::string MakeRunDir(const std::string& root, const std::string& name);

// Plain-text artifacts: tab-separated tables with a leading '#' header line.
void WriteRdCurveTable(const std::string& path, const RdCurve& curve);
void WriteSweepTable(const std::string& path, const SweepTable& table);

struct SvgSeries {
  std::string label;
  std::vector<RdPoint> points;  // bpp is the x value, msssim the y value
  std::string color;            // empty picks from a fixed palette
};

// Self-contained static SVG: titled axes, tick grid, one polyline with point
// markers per series, and a legend. Points are connected in x order.
void WriteXySvg(const std::string& path, const std::string& title,
                const std::string& x_label, const std::string& y_label,
                const std::vector<SvgSeries>& series);

// WriteXySvg with rate-distortion axis labels.
void WriteRdCurveSvg(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series);

}  // namespace dsin

#endif  // DSIN_EVAL_H_
