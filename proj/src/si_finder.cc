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

// The dense search is organized as one matrix product: target patches are
// flattened into a (patches x n) matrix, side-image windows into an
// (n x positions) matrix, so every cross term Sum(a*b) comes from a GEMM.
// Per-window sums and sums of squares come from integral images, which
// turns each Pearson score into O(1) arithmetic on top of the cross term.

#include "dsin/si_finder.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace dsin {

namespace {

constexpr double kVarFloor = 1e-9;

using MatRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ImageF ApplyTransform(const ImageF& img, const MatcherConfig& cfg) {
  return cfg.color_transform == "luma" ? Luma(img) : img;
}

struct PatchStats {
  double mean = 0.0;
  double var = 0.0;  // population variance
};

PatchStats StatsOf(const double* v, int64_t n) {
  double s1 = 0.0, s2 = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    s1 += v[i];
    s2 += v[i] * v[i];
  }
  PatchStats st;
  st.mean = s1 / n;
  st.var = std::max(0.0, s2 / n - st.mean * st.mean);
  return st;
}

// (h+1)x(w+1) summed-area tables of x and x^2, all channels accumulated.
struct SummedArea {
  int h = 0, w = 0;
  std::vector<double> s1, s2;

  explicit SummedArea(const ImageF& img) : h(img.h), w(img.w) {
    s1.assign(static_cast<size_t>(h + 1) * (w + 1), 0.0);
    s2.assign(static_cast<size_t>(h + 1) * (w + 1), 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double v1 = 0.0, v2 = 0.0;
        for (int ch = 0; ch < img.c; ++ch) {
          const double v = img.At(ch, y, x);
          v1 += v;
          v2 += v * v;
        }
        const int64_t row = static_cast<int64_t>(y + 1) * (w + 1);
        const int64_t prev = static_cast<int64_t>(y) * (w + 1);
        s1[row + x + 1] = v1 + s1[row + x] + s1[prev + x + 1] - s1[prev + x];
        s2[row + x + 1] = v2 + s2[row + x] + s2[prev + x + 1] - s2[prev + x];
      }
    }
  }

  void WindowSums(int ty, int tx, int wh, int ww, double* sum1,
                  double* sum2) const {
    const int64_t r0 = static_cast<int64_t>(ty) * (w + 1);
    const int64_t r1 = static_cast<int64_t>(ty + wh) * (w + 1);
    *sum1 = s1[r1 + tx + ww] - s1[r1 + tx] - s1[r0 + tx + ww] + s1[r0 + tx];
    *sum2 = s2[r1 + tx + ww] - s2[r1 + tx] - s2[r0 + tx + ww] + s2[r0 + tx];
  }
};

// Flattens the window at (ty,tx) in (channel, row, col) order.
void CopyWindow(const ImageF& img, int ty, int tx, int wh, int ww,
                double* out) {
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < wh; ++y) {
      const double* src = img.Plane(ch) + static_cast<int64_t>(ty + y) * img.w + tx;
      std::copy(src, src + ww, out);
      out += ww;
    }
  }
}

struct SearchGrid {
  std::vector<int> ys, xs;  // stride-spaced window top-lefts
};

SearchGrid MakeGrid(const ImageF& y_dec, const MatcherConfig& cfg) {
  SearchGrid g;
  for (int ty = 0; ty + cfg.patch_h <= y_dec.h; ty += cfg.search_stride) {
    g.ys.push_back(ty);
  }
  for (int tx = 0; tx + cfg.patch_w <= y_dec.w; tx += cfg.search_stride) {
    g.xs.push_back(tx);
  }
  return g;
}

struct MaskParams {
  bool enabled = false;
  double sigma_y = 1.0, sigma_x = 1.0;
};

MaskParams MaskFor(const ImageF& y_dec, const MatcherConfig& cfg) {
  MaskParams m;
  m.enabled = cfg.mask_enabled;
  m.sigma_y = cfg.mask_sigma_y > 0.0 ? cfg.mask_sigma_y : 0.5 * y_dec.h;
  m.sigma_x = cfg.mask_sigma_x > 0.0 ? cfg.mask_sigma_x : 0.5 * y_dec.w;
  return m;
}

}  // namespace

double PearsonPatchCorr(const ImageF& a, const ImageF& b) {
  DSIN_REQUIRE(a.SameShape(b), "PearsonPatchCorr: shape mismatch");
  const int64_t n = static_cast<int64_t>(a.data.size());
  DSIN_REQUIRE(n > 0, "PearsonPatchCorr: empty patch");
  const PatchStats sa = StatsOf(a.data.data(), n);
  const PatchStats sb = StatsOf(b.data.data(), n);
  if (sa.var < kVarFloor || sb.var < kVarFloor) return 0.0;
  double cross = 0.0;
  for (int64_t i = 0; i < n; ++i) cross += a.data[i] * b.data[i];
  const double cov = cross / n - sa.mean * sb.mean;
  return std::clamp(cov / std::sqrt(sa.var * sb.var), -1.0, 1.0);
}

double GaussianMaskWeight(double dy, double dx, double sigma_y,
                          double sigma_x) {
  DSIN_REQUIRE(sigma_y > 0.0 && sigma_x > 0.0,
               "GaussianMaskWeight: sigmas must be positive");
  return std::exp(-(dy * dy) / (2.0 * sigma_y * sigma_y) -
                  (dx * dx) / (2.0 * sigma_x * sigma_x));
}

PatchAssignment FindAssignment(const ImageF& x_dec, const ImageF& y_dec,
                               const MatcherConfig& cfg) {
  cfg.Validate();
  DSIN_REQUIRE(x_dec.c == y_dec.c, "FindAssignment: channel mismatch");
  DSIN_REQUIRE(y_dec.h >= cfg.patch_h && y_dec.w >= cfg.patch_w,
               "FindAssignment: side image smaller than one patch");
  DSIN_REQUIRE(x_dec.h >= 1 && x_dec.w >= 1, "FindAssignment: empty target");

  const ImageF tx = ApplyTransform(x_dec, cfg);
  const ImageF ty = ApplyTransform(y_dec, cfg);
  const ImageF txp = PadToMultipleOf(tx, cfg.patch_h, cfg.patch_w);

  PatchAssignment f;
  f.patch_h = cfg.patch_h;
  f.patch_w = cfg.patch_w;
  f.patches_y = txp.h / cfg.patch_h;
  f.patches_x = txp.w / cfg.patch_w;
  f.out_h = x_dec.h;
  f.out_w = x_dec.w;
  const int patches = f.patches_y * f.patches_x;
  const int64_t n = static_cast<int64_t>(txp.c) * cfg.patch_h * cfg.patch_w;

  // Patch matrix and per-patch stats.
  MatRM xmat(patches, n);
  std::vector<PatchStats> xstats(patches);
  for (int p = 0; p < patches; ++p) {
    const int py = (p / f.patches_x) * cfg.patch_h;
    const int px = (p % f.patches_x) * cfg.patch_w;
    CopyWindow(txp, py, px, cfg.patch_h, cfg.patch_w, xmat.row(p).data());
    xstats[p] = StatsOf(xmat.row(p).data(), n);
  }

  const SearchGrid grid = MakeGrid(ty, cfg);
  const MaskParams mask = MaskFor(y_dec, cfg);
  const SummedArea sums(ty);

  f.offset_y.assign(patches, 0);
  f.offset_x.assign(patches, 0);
  f.score.assign(patches, -1e300);

  const int64_t total_pos = static_cast<int64_t>(grid.ys.size()) * grid.xs.size();
  const int64_t block = 2048;
  MatRM cols(n, std::min<int64_t>(block, total_pos));
  MatRM cross(patches, std::min<int64_t>(block, total_pos));

  for (int64_t start = 0; start < total_pos; start += block) {
    const int64_t count = std::min<int64_t>(block, total_pos - start);
    for (int64_t j = 0; j < count; ++j) {
      const int64_t pos = start + j;
      const int wy = grid.ys[pos / grid.xs.size()];
      const int wx = grid.xs[pos % grid.xs.size()];
      std::vector<double> buf(n);
      CopyWindow(ty, wy, wx, cfg.patch_h, cfg.patch_w, buf.data());
      cols.col(j).head(n) = Eigen::Map<Eigen::VectorXd>(buf.data(), n);
    }
    cross.leftCols(count).noalias() = xmat * cols.leftCols(count);

    for (int64_t j = 0; j < count; ++j) {
      const int64_t pos = start + j;
      const int wy = grid.ys[pos / grid.xs.size()];
      const int wx = grid.xs[pos % grid.xs.size()];
      double s1 = 0.0, s2 = 0.0;
      sums.WindowSums(wy, wx, cfg.patch_h, cfg.patch_w, &s1, &s2);
      const double b_mean = s1 / n;
      const double b_var = std::max(0.0, s2 / n - b_mean * b_mean);
      for (int p = 0; p < patches; ++p) {
        double corr = 0.0;
        if (xstats[p].var >= kVarFloor && b_var >= kVarFloor) {
          const double cov = cross(p, j) / n - xstats[p].mean * b_mean;
          corr = std::clamp(cov / std::sqrt(xstats[p].var * b_var), -1.0, 1.0);
        }
        double score = corr + 1.0;
        if (mask.enabled) {
          const int own_y = (p / f.patches_x) * cfg.patch_h;
          const int own_x = (p % f.patches_x) * cfg.patch_w;
          score *= GaussianMaskWeight(wy - own_y, wx - own_x, mask.sigma_y,
                                      mask.sigma_x);
        }
        // Strict improvement keeps the smallest row-major candidate on ties.
        if (score > f.score[p]) {
          f.score[p] = score;
          f.offset_y[p] = wy;
          f.offset_x[p] = wx;
        }
      }
    }
  }
  return f;
}

ImageF AssembleYsyn(const ImageF& y, const PatchAssignment& f) {
  DSIN_REQUIRE(f.patches_y >= 1 && f.patches_x >= 1,
               "AssembleYsyn: empty assignment");
  const int patches = f.patches_y * f.patches_x;
  DSIN_REQUIRE(static_cast<int>(f.offset_y.size()) == patches &&
                   static_cast<int>(f.offset_x.size()) == patches,
               "AssembleYsyn: offset table size mismatch");
  ImageF mosaic(f.patches_y * f.patch_h, f.patches_x * f.patch_w, y.c);
  for (int p = 0; p < patches; ++p) {
    const int oy = f.offset_y[p];
    const int ox = f.offset_x[p];
    DSIN_REQUIRE(oy >= 0 && ox >= 0 && oy + f.patch_h <= y.h &&
                     ox + f.patch_w <= y.w,
                 "AssembleYsyn: offset outside the side image");
    const int dy = (p / f.patches_x) * f.patch_h;
    const int dx = (p % f.patches_x) * f.patch_w;
    for (int ch = 0; ch < y.c; ++ch) {
      for (int r = 0; r < f.patch_h; ++r) {
        const double* src = y.Plane(ch) + static_cast<int64_t>(oy + r) * y.w + ox;
        double* dst =
            mosaic.Plane(ch) + static_cast<int64_t>(dy + r) * mosaic.w + dx;
        std::copy(src, src + f.patch_w, dst);
      }
    }
  }
  DSIN_REQUIRE(f.out_h <= mosaic.h && f.out_w <= mosaic.w,
               "AssembleYsyn: recorded dims exceed the mosaic");
  return CropTo(mosaic, f.out_h, f.out_w);
}

void MatchDebugDump(const ImageF& x_dec, const ImageF& y_dec,
                    const MatcherConfig& cfg, const std::string& dir) {
  cfg.Validate();
  std::filesystem::create_directories(dir);
  const ImageF tx = ApplyTransform(x_dec, cfg);
  const ImageF ty = ApplyTransform(y_dec, cfg);
  const ImageF txp = PadToMultipleOf(tx, cfg.patch_h, cfg.patch_w);
  const int patches_y = txp.h / cfg.patch_h;
  const int patches_x = txp.w / cfg.patch_w;
  const SearchGrid grid = MakeGrid(ty, cfg);
  const MaskParams mask = MaskFor(y_dec, cfg);
  const PatchAssignment f = FindAssignment(x_dec, y_dec, cfg);

  std::ofstream offsets(dir + "/offsets.tsv");
  offsets << "patch_row\tpatch_col\toffset_y\toffset_x\tscore\n";

  for (int p = 0; p < patches_y * patches_x; ++p) {
    const int py = (p / patches_x) * cfg.patch_h;
    const int px = (p % patches_x) * cfg.patch_w;
    ImageF xpatch(cfg.patch_h, cfg.patch_w, txp.c);
    for (int ch = 0; ch < txp.c; ++ch) {
      for (int r = 0; r < cfg.patch_h; ++r) {
        const double* src = txp.Plane(ch) + static_cast<int64_t>(py + r) * txp.w + px;
        std::copy(src, src + cfg.patch_w,
                  xpatch.Plane(ch) + static_cast<int64_t>(r) * cfg.patch_w);
      }
    }
    ImageF surface(static_cast<int>(grid.ys.size()),
                   static_cast<int>(grid.xs.size()), 1);
    ImageF window(cfg.patch_h, cfg.patch_w, ty.c);
    for (size_t iy = 0; iy < grid.ys.size(); ++iy) {
      for (size_t ix = 0; ix < grid.xs.size(); ++ix) {
        for (int ch = 0; ch < ty.c; ++ch) {
          for (int r = 0; r < cfg.patch_h; ++r) {
            const double* src = ty.Plane(ch) +
                                static_cast<int64_t>(grid.ys[iy] + r) * ty.w +
                                grid.xs[ix];
            std::copy(src, src + cfg.patch_w,
                      window.Plane(ch) + static_cast<int64_t>(r) * cfg.patch_w);
          }
        }
        double score = PearsonPatchCorr(xpatch, window) + 1.0;
        if (mask.enabled) {
          score *= GaussianMaskWeight(grid.ys[iy] - py, grid.xs[ix] - px,
                                      mask.sigma_y, mask.sigma_x);
        }
        surface.At(0, static_cast<int>(iy), static_cast<int>(ix)) = score / 2.0;
      }
    }
    char name[64];
    std::snprintf(name, sizeof(name), "/corr_patch_%03d.png", p);
    WritePng(dir + name, ToU8(surface));
    offsets << (p / patches_x) << '\t' << (p % patches_x) << '\t'
            << f.offset_y[p] << '\t' << f.offset_x[p] << '\t' << f.score[p]
            << '\n';
  }
}

}  // namespace dsin
