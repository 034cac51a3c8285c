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

#ifndef DSIN_METRICS_H_
#define DSIN_METRICS_H_

#include <vector>

#include "dsin/image.h"

namespace dsin {

// Per-image quality record consumed by the evaluation harness.
struct QualityReport {
  double msssim = 0.0;
  double l1 = 0.0;
  double psnr = 0.0;
  double bpp_estimated = 0.0;
  double bpp_coded = 0.0;
};

// Multi-scale structural similarity on luma, valid-region filtering with an
// 11-tap Gaussian (sigma 1.5), K1=0.01, K2=0.03 on a unit dynamic range,
// 2x2 average-pool between scales, reference weights over up to 5 scales.
// Scales that would shrink below the filter support are dropped and the
// remaining weights renormalized. Throws if even one scale does not fit.
double MsSsim(const ImageF& a, const ImageF& b);

// Number of usable MS-SSIM scales for an image of the given dims (<= 5).
int MsSsimScalesFor(int h, int w);

// Mean absolute difference over all channels.
double L1Distance(const ImageF& a, const ImageF& b);

// Peak signal-to-noise ratio for unit-range images, capped at 99 dB.
double Psnr(const ImageF& a, const ImageF& b);

// Mean Pearson correlation over co-located non-overlapping luma patches;
// images are cropped to patch multiples and degenerate patches score 0.
double AvgPatchPearson(const ImageF& x, const ImageF& y_syn, int patch_h,
                       int patch_w);

// 100 * (with/without - 1); both must be in (0, 1].
double ImprovementRatio(double with_si, double without_si);

// Mean of per-image improvement ratios.
double BatchImprovementRatio(const std::vector<double>& with_si,
                             const std::vector<double>& without_si);

}  // namespace dsin

#endif  // DSIN_METRICS_H_
