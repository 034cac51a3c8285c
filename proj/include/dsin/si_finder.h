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

// Non-trainable side-information search. For every non-overlapping patch of
// the decoded target image, scan all candidate windows of the decoded side
// image for the highest Pearson correlation (optionally weighted by a
// Gaussian location prior), then build the synthetic side image by copying
// the winning windows from the ORIGINAL side image. Runs on pixel values
// only, so no gradient can flow through the assignment.

#ifndef DSIN_SI_FINDER_H_
#define DSIN_SI_FINDER_H_

#include <string>
#include <vector>

#include "dsin/image.h"

namespace dsin {

struct MatcherConfig {
  int patch_h = 20;
  int patch_w = 24;
  int search_stride = 1;
  // "luma" correlates a single grey projection; "identity" correlates all
  // channels jointly.
  std::string color_transform = "luma";
  bool mask_enabled = true;
  // Gaussian prior standard deviations in pixels; 0 means half the side
  // image's extent on that axis.
  double mask_sigma_y = 0.0;
  double mask_sigma_x = 0.0;

  void Validate() const {
    DSIN_REQUIRE(patch_h >= 1 && patch_w >= 1, "MatcherConfig: bad patch dims");
    DSIN_REQUIRE(search_stride >= 1, "MatcherConfig: stride must be >= 1");
    DSIN_REQUIRE(color_transform == "luma" || color_transform == "identity",
                 "MatcherConfig: unknown color transform");
    DSIN_REQUIRE(mask_sigma_y >= 0.0 && mask_sigma_x >= 0.0,
                 "MatcherConfig: sigmas must be >= 0");
  }
};

// Assignment of one side-image window to every non-overlapping target patch.
struct PatchAssignment {
  int patch_h = 0, patch_w = 0;
  int patches_y = 0, patches_x = 0;  // patch grid over the padded target
  int out_h = 0, out_w = 0;          // target dims the mosaic must match
  std::vector<int> offset_y, offset_x;  // per patch (row-major): window top-left
  std::vector<double> score;            // winning combined score
};

// Pearson correlation over all channels of two equal-shaped patches, in
// [-1,1]. Either side with population variance below 1e-9 yields 0.
double PearsonPatchCorr(const ImageF& a, const ImageF& b);

// Location prior on top-left displacement: 1 at zero offset, separable
// exp(-dy^2/2sy^2 - dx^2/2sx^2), strictly decreasing in |dy| and |dx|.
double GaussianMaskWeight(double dy, double dx, double sigma_y, double sigma_x);

// Dense argmax of (correlation + 1) * mask over all stride-spaced windows
// of y_dec, per non-overlapping x_dec patch. The target is mirror-padded to
// patch multiples; windows must lie fully inside y_dec. Ties resolve to the
// smallest row-major candidate index.
PatchAssignment FindAssignment(const ImageF& x_dec, const ImageF& y_dec,
                               const MatcherConfig& cfg);

// Mosaic of windows copied from the ORIGINAL side image at the assigned
// offsets, cropped to the target dims recorded in the assignment.
ImageF AssembleYsyn(const ImageF& y, const PatchAssignment& f);

// Writes per-patch correlation maps (PNG) and the offset table (TSV) for
// visual inspection of the search.
void MatchDebugDump(const ImageF& x_dec, const ImageF& y_dec,
                    const MatcherConfig& cfg, const std::string& dir);

}  // namespace dsin

#endif  // DSIN_SI_FINDER_H_
