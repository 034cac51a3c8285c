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

// Pair construction: scans two-camera scene directories into (target, side)
// image pairs, reads and writes plain-text pair manifests, and generates
// seeded synthetic correlated pairs for controlled experiments.

#ifndef DSIN_DATA_PAIRS_H_
#define DSIN_DATA_PAIRS_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dsin/image.h"
#include "dsin/run_config.h"

namespace dsin {

// Frames of one scene, keyed by integer timestamp per camera.
struct SceneFrames {
  std::string scene;
  std::map<int, std::string> left;   // time -> file path
  std::map<int, std::string> right;
};

// Scans root/<scene>/<left|right>/<t>.png. Scene order is lexicographic and
// times are numeric, so the result is deterministic for a fixed tree. Files
// whose stem is not an integer are ignored.
std::vector<SceneFrames> ScanFrames(const std::string& root);

struct PairRecord {
  std::string x_path, y_path;
  std::string mode;  // "stereo" | "general" | "synthetic"
  int k = 0;         // time offset between x and y; 0 outside general mode

  friend bool operator==(const PairRecord& a, const PairRecord& b) {
    return a.x_path == b.x_path && a.y_path == b.y_path && a.mode == b.mode &&
           a.k == b.k;
  }
};

// stereo: X = left_t, Y = right_t. general: X = left_t, Y = right_{t+k},
// the later frame always serving as side information, with k running over
// {1,2,3} when spec.time_offset is 0 and exactly spec.time_offset otherwise.
// Pairs whose counterpart frame is missing are skipped; if `skip_log` is
// non-null one line per skip is appended. Ordering is scene, time, k.
std::vector<PairRecord> BuildPairs(const std::vector<SceneFrames>& scenes,
                                   const PairSpec& spec,
                                   std::vector<std::string>* skip_log);

// One "x_path\ty_path\tmode\tk" line per pair.
void WriteManifest(const std::string& path,
                   const std::vector<PairRecord>& pairs);
std::vector<PairRecord> ReadManifest(const std::string& path);

// Loads both sides of every record as unit-interval RGB images. Relative
// paths resolve against data_root; absolute paths are taken as-is.
std::vector<std::pair<ImageF, ImageF>> LoadPairImages(
    const std::vector<PairRecord>& pairs, const std::string& data_root);

// Smooth procedural test image: a shared random cosine-and-blob field gives
// three strongly correlated channels, jointly normalized into [0.1, 0.9].
// Bit-reproducible for a fixed (h, w, seed).
ImageF MakeBaseImage(int h, int w, uint64_t seed);

// Patch size used for the generator's correlation self-report.
inline constexpr int kCorrPatch = 8;

struct SynthPair {
  ImageF x, y;
  double achieved_correlation = 0.0;  // avg patch Pearson of x vs aligned y
  int dy = 0, dx = 0;                 // applied cyclic translation
  double noise_sigma = 0.0;           // noise level the search settled on
};

// X is the base image; Y applies, in order: photometric gain/bias, cyclic
// translation up to spec.translation_px per axis, per-row shear up to
// spec.affine_jitter px, occlusion rectangles covering about
// spec.occlusion_fraction of the area, and Gaussian noise. The noise level
// is bisected until avg patch Pearson between X and the geometrically
// re-aligned Y lands inside [spec.corr_lo, spec.corr_hi], starting from
// spec.noise_sigma; fresh perturbation draws are retried a bounded number
// of times before the band is declared unreachable.
SynthPair MakeSynthPair(const ImageF& base, const PairSpec& spec,
                        uint64_t seed);

}  // namespace dsin

#endif  // DSIN_DATA_PAIRS_H_
