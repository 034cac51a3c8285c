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

#include "dsin/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>

namespace dsin {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;
constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001,
                                                 0.2363, 0.1333};

std::array<double, kWindow> GaussianKernel() {
  std::array<double, kWindow> k{};
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Single-plane container used by the pyramid.
struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  Plane(int hh, int ww) : h(hh), w(ww), v(static_cast<size_t>(hh) * ww) {}
  double& At(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double At(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

Plane LumaPlane(const ImageF& img) {
  ImageF y = Luma(img);
  Plane p(y.h, y.w);
  p.v = y.data;
  return p;
}

// Separable valid-mode Gaussian filtering: output (h-10) x (w-10).
Plane Blur(const Plane& in) {
  static const std::array<double, kWindow> k = GaussianKernel();
  Plane mid(in.h, in.w - kWindow + 1);
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < mid.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) acc += k[i] * in.At(y, x + i);
      mid.At(y, x) = acc;
    }
  }
  Plane out(in.h - kWindow + 1, mid.w);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) acc += k[i] * mid.At(y + i, x);
      out.At(y, x) = acc;
    }
  }
  return out;
}

Plane Multiply(const Plane& a, const Plane& b) {
  Plane out(a.h, a.w);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

Plane Downsample2(const Plane& in) {
  Plane out(in.h / 2, in.w / 2);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      out.At(y, x) = 0.25 * (in.At(2 * y, 2 * x) + in.At(2 * y, 2 * x + 1) +
                             in.At(2 * y + 1, 2 * x) + in.At(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

// Mean SSIM and mean contrast-structure term over the valid region.
void SsimScale(const Plane& a, const Plane& b, double* mean_ssim,
               double* mean_cs) {
  const Plane mu1 = Blur(a);
  const Plane mu2 = Blur(b);
  const Plane s11 = Blur(Multiply(a, a));
  const Plane s22 = Blur(Multiply(b, b));
  const Plane s12 = Blur(Multiply(a, b));
  double ssim_sum = 0.0, cs_sum = 0.0;
  for (size_t i = 0; i < mu1.v.size(); ++i) {
    const double m1 = mu1.v[i], m2 = mu2.v[i];
    const double var1 = s11.v[i] - m1 * m1;
    const double var2 = s22.v[i] - m2 * m2;
    const double cov = s12.v[i] - m1 * m2;
    const double cs = (2.0 * cov + kC2) / (var1 + var2 + kC2);
    const double lum = (2.0 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1);
    cs_sum += cs;
    ssim_sum += lum * cs;
  }
  *mean_ssim = ssim_sum / mu1.v.size();
  *mean_cs = cs_sum / mu1.v.size();
}

}  // namespace

int MsSsimScalesFor(int h, int w) {
  int scales = 0;
  while (scales < 5 && h >= kWindow && w >= kWindow) {
    ++scales;
    h /= 2;
    w /= 2;
  }
  return scales;
}

double MsSsim(const ImageF& a, const ImageF& b) {
  DSIN_REQUIRE(a.SameShape(b), "MsSsim: shape mismatch");
  const int scales = MsSsimScalesFor(a.h, a.w);
  DSIN_REQUIRE(scales >= 1, "MsSsim: image smaller than the filter window");

  double weight_sum = 0.0;
  for (int s = 0; s < scales; ++s) weight_sum += kScaleWeights[s];

  Plane pa = LumaPlane(a);
  Plane pb = LumaPlane(b);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    double mean_ssim = 0.0, mean_cs = 0.0;
    SsimScale(pa, pb, &mean_ssim, &mean_cs);
    const double w = kScaleWeights[s] / weight_sum;
    const double base = (s == scales - 1) ? mean_ssim : mean_cs;
    result *= std::pow(std::max(base, 0.0), w);
    if (s + 1 < scales) {
      pa = Downsample2(pa);
      pb = Downsample2(pb);
    }
  }
  return result;
}

double L1Distance(const ImageF& a, const ImageF& b) {
  DSIN_REQUIRE(a.SameShape(b), "L1Distance: shape mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    sum += std::abs(a.data[i] - b.data[i]);
  }
  return sum / a.data.size();
}

double Psnr(const ImageF& a, const ImageF& b) {
  DSIN_REQUIRE(a.SameShape(b), "Psnr: shape mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= a.data.size();
  if (mse <= 0.0) return 99.0;
  return std::min(99.0, -10.0 * std::log10(mse));
}

double AvgPatchPearson(const ImageF& x, const ImageF& y_syn, int patch_h,
                       int patch_w) {
  DSIN_REQUIRE(patch_h >= 1 && patch_w >= 1, "AvgPatchPearson: bad patch dims");
  DSIN_REQUIRE(x.SameShape(y_syn), "AvgPatchPearson: shape mismatch");
  DSIN_REQUIRE(x.h >= patch_h && x.w >= patch_w,
               "AvgPatchPearson: image smaller than one patch");
  const ImageF lx = Luma(x);
  const ImageF ly = Luma(y_syn);
  const int rows = x.h / patch_h;
  const int cols = x.w / patch_w;
  double sum = 0.0;
  const int64_t n = static_cast<int64_t>(patch_h) * patch_w;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int py = 0; py < patch_h; ++py) {
        for (int px = 0; px < patch_w; ++px) {
          const double va = lx.At(0, r * patch_h + py, c * patch_w + px);
          const double vb = ly.At(0, r * patch_h + py, c * patch_w + px);
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      const double var_a = std::max(0.0, saa / n - (sa / n) * (sa / n));
      const double var_b = std::max(0.0, sbb / n - (sb / n) * (sb / n));
      if (var_a >= 1e-9 && var_b >= 1e-9) {
        const double cov = sab / n - (sa / n) * (sb / n);
        sum += std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
      }
    }
  }
  return sum / (static_cast<double>(rows) * cols);
}

double ImprovementRatio(double with_si, double without_si) {
  DSIN_REQUIRE(without_si > 0.0 && without_si <= 1.0 && with_si > 0.0 &&
                   with_si <= 1.0,
               "ImprovementRatio: values must be in (0,1]");
  return 100.0 * (with_si / without_si - 1.0);
}

double BatchImprovementRatio(const std::vector<double>& with_si,
                             const std::vector<double>& without_si) {
  DSIN_REQUIRE(!with_si.empty() && with_si.size() == without_si.size(),
               "BatchImprovementRatio: size mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < with_si.size(); ++i) {
    sum += ImprovementRatio(with_si[i], without_si[i]);
  }
  return sum / with_si.size();
}

}  // namespace dsin
