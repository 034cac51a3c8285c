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

#include "dsin/data_pairs.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsin/metrics.h"
#include "dsin/rng.h"

namespace dsin {
namespace {

namespace fs = std::filesystem;

bool ParseFrameTime(const std::string& stem, int* t) {
  const char* first = stem.data();
  const char* last = first + stem.size();
  auto [ptr, ec] = std::from_chars(first, last, *t);
  return ec == std::errc() && ptr == last && *t >= 0;
}

std::map<int, std::string> ScanCamera(const fs::path& dir) {
  std::map<int, std::string> frames;
  if (!fs::is_directory(dir)) return frames;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".png") continue;
    int t = 0;
    if (!ParseFrameTime(e.path().stem().string(), &t)) continue;
    frames[t] = e.path().string();
  }
  return frames;
}

// Linear per-row horizontal shift from -jitter to +jitter, cyclic so the
// transform is exactly invertible with the opposite sign.
ImageF ShearRows(const ImageF& img, double jitter, int sign) {
  if (jitter == 0.0) return img;
  ImageF out(img.h, img.w, img.c);
  for (int y = 0; y < img.h; ++y) {
    const double frac = img.h > 1 ? 2.0 * y / (img.h - 1.0) - 1.0 : 0.0;
    const int shift = static_cast<int>(std::llround(jitter * frac)) * sign;
    for (int ch = 0; ch < img.c; ++ch) {
      for (int x = 0; x < img.w; ++x) {
        const int xo = ((x + shift) % img.w + img.w) % img.w;
        out.At(ch, y, xo) = img.At(ch, y, x);
      }
    }
  }
  return out;
}

struct Geometry {
  int dy = 0, dx = 0;
  double jitter = 0.0;

  ImageF Apply(const ImageF& img) const {
    return ShearRows(Roll(img, dy, dx), jitter, +1);
  }
  ImageF Invert(const ImageF& img) const {
    return Roll(ShearRows(img, jitter, -1), -dy, -dx);
  }
};

void PaintOcclusions(ImageF* img, double fraction, Rng& rng) {
  if (fraction <= 0.0) return;
  const double target = fraction * img->h * img->w;
  double covered = 0.0;
  for (int rect = 0; rect < 64 && covered < target; ++rect) {
    const int rh = 1 + static_cast<int>(rng.Below(std::max(img->h / 3, 1)));
    const int rw = 1 + static_cast<int>(rng.Below(std::max(img->w / 3, 1)));
    const int y0 = static_cast<int>(rng.Below(std::max(img->h - rh + 1, 1)));
    const int x0 = static_cast<int>(rng.Below(std::max(img->w - rw + 1, 1)));
    const double value = rng.Uniform(0.2, 0.8);
    for (int ch = 0; ch < img->c; ++ch) {
      for (int y = y0; y < y0 + rh; ++y) {
        for (int x = x0; x < x0 + rw; ++x) img->At(ch, y, x) = value;
      }
    }
    covered += static_cast<double>(rh) * rw;
  }
}

ImageF AddScaledNoise(const ImageF& img, const std::vector<double>& unit_noise,
                      double sigma) {
  if (sigma == 0.0) return img;
  ImageF out = img;
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] =
        std::clamp(out.data[i] + sigma * unit_noise[i], 0.0, 1.0);
  }
  return out;
}

ImageF GreyToRgb(const ImageF& img) {
  if (img.c == 3) return img;
  DSIN_REQUIRE(img.c == 1, "expected a 1- or 3-channel image");
  ImageF out(img.h, img.w, 3);
  for (int ch = 0; ch < 3; ++ch) {
    std::copy(img.Plane(0), img.Plane(0) + size_t(img.h) * img.w,
              out.Plane(ch));
  }
  return out;
}

}  // namespace

std::vector<SceneFrames> ScanFrames(const std::string& root) {
  DSIN_REQUIRE(fs::is_directory(root), "data root is not a directory: " + root);
  std::vector<fs::path> dirs;
  for (const fs::directory_entry& e : fs::directory_iterator(root)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());

  std::vector<SceneFrames> scenes;
  for (const fs::path& dir : dirs) {
    SceneFrames sf;
    sf.scene = dir.filename().string();
    sf.left = ScanCamera(dir / "left");
    sf.right = ScanCamera(dir / "right");
    if (!sf.left.empty() || !sf.right.empty()) scenes.push_back(std::move(sf));
  }
  return scenes;
}

std::vector<PairRecord> BuildPairs(const std::vector<SceneFrames>& scenes,
                                   const PairSpec& spec,
                                   std::vector<std::string>* skip_log) {
  spec.Validate();
  DSIN_REQUIRE(spec.mode == "stereo" || spec.mode == "general",
               "BuildPairs: only stereo and general pairs come from a frame "
               "index; synthetic pairs are generated");
  std::vector<int> ks;
  if (spec.mode == "general") {
    if (spec.time_offset == 0) {
      ks = {1, 2, 3};
    } else {
      ks = {spec.time_offset};
    }
  }

  std::vector<PairRecord> out;
  for (const SceneFrames& s : scenes) {
    for (const auto& [t, x_path] : s.left) {
      if (spec.mode == "stereo") {
        auto it = s.right.find(t);
        if (it == s.right.end()) {
          if (skip_log != nullptr) {
            skip_log->push_back("scene " + s.scene + ": no right frame " +
                                std::to_string(t) + " for stereo pair");
          }
          continue;
        }
        out.push_back({x_path, it->second, "stereo", 0});
        continue;
      }
      for (int k : ks) {
        auto it = s.right.find(t + k);
        if (it == s.right.end()) {
          if (skip_log != nullptr) {
            skip_log->push_back("scene " + s.scene + ": no right frame " +
                                std::to_string(t + k) + " for left frame " +
                                std::to_string(t) + " (k=" +
                                std::to_string(k) + ")");
          }
          continue;
        }
        out.push_back({x_path, it->second, "general", k});
      }
    }
  }
  return out;
}

void WriteManifest(const std::string& path,
                   const std::vector<PairRecord>& pairs) {
  std::ofstream out(path, std::ios::trunc);
  DSIN_REQUIRE(out.good(), "cannot write manifest: " + path);
  for (const PairRecord& p : pairs) {
    out << p.x_path << '\t' << p.y_path << '\t' << p.mode << '\t' << p.k
        << '\n';
  }
  out.flush();
  DSIN_REQUIRE(out.good(), "short write to manifest: " + path);
}

std::vector<PairRecord> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  DSIN_REQUIRE(in.good(), "cannot open manifest: " + path);
  std::vector<PairRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where =
        "manifest " + path + " line " + std::to_string(line_no);
    DSIN_REQUIRE(fields.size() == 4, where + ": want 4 tab-separated fields");
    PairRecord rec;
    rec.x_path = fields[0];
    rec.y_path = fields[1];
    rec.mode = fields[2];
    DSIN_REQUIRE(!rec.x_path.empty() && !rec.y_path.empty(),
                 where + ": empty path");
    DSIN_REQUIRE(rec.mode == "stereo" || rec.mode == "general" ||
                     rec.mode == "synthetic",
                 where + ": unknown mode " + rec.mode);
    int k = 0;
    DSIN_REQUIRE(ParseFrameTime(fields[3], &k), where + ": bad k field");
    rec.k = k;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::pair<ImageF, ImageF>> LoadPairImages(
    const std::vector<PairRecord>& pairs, const std::string& data_root) {
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    if (fp.is_absolute() || data_root.empty()) return p;
    return (fs::path(data_root) / fp).string();
  };
  std::vector<std::pair<ImageF, ImageF>> out;
  out.reserve(pairs.size());
  for (const PairRecord& rec : pairs) {
    out.emplace_back(GreyToRgb(ToFloat(ReadPng(resolve(rec.x_path)))),
                     GreyToRgb(ToFloat(ReadPng(resolve(rec.y_path)))));
  }
  return out;
}

ImageF MakeBaseImage(int h, int w, uint64_t seed) {
  DSIN_REQUIRE(h >= 1 && w >= 1, "MakeBaseImage: bad dimensions");
  Rng rng(Rng::Mix(seed, 0x62617365));
  const double pi = 3.14159265358979323846;

  std::vector<double> field(static_cast<size_t>(h) * w, 0.0);
  constexpr int kWaves = 6;
  for (int i = 0; i < kWaves; ++i) {
    const double fy = rng.Uniform(0.5, 3.5) * (rng.Below(2) ? 1.0 : -1.0);
    const double fx = rng.Uniform(0.5, 3.5) * (rng.Below(2) ? 1.0 : -1.0);
    const double phase = rng.Uniform(0.0, 2.0 * pi);
    const double amp = 1.0 / (1.0 + i);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        field[static_cast<size_t>(y) * w + x] +=
            amp * std::cos(2.0 * pi * (fy * y / h + fx * x / w) + phase);
      }
    }
  }
  constexpr int kBlobs = 3;
  for (int i = 0; i < kBlobs; ++i) {
    const double cy = rng.Uniform(0.0, h);
    const double cx = rng.Uniform(0.0, w);
    const double r = rng.Uniform(std::min(h, w) / 8.0,
                                 std::max(std::min(h, w) / 3.0, 1.0));
    const double amp = rng.Uniform(-1.2, 1.2);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        field[static_cast<size_t>(y) * w + x] +=
            amp * std::exp(-d2 / (2.0 * r * r));
      }
    }
  }

  // A small per-channel wave on top of the shared field keeps the channels
  // distinct but highly correlated.
  ImageF img(h, w, 3);
  for (int ch = 0; ch < 3; ++ch) {
    const double fy = rng.Uniform(0.5, 2.5);
    const double fx = rng.Uniform(0.5, 2.5);
    const double phase = rng.Uniform(0.0, 2.0 * pi);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        img.At(ch, y, x) =
            field[static_cast<size_t>(y) * w + x] +
            0.2 * std::cos(2.0 * pi * (fy * y / h + fx * x / w) + phase);
      }
    }
  }

  // One affine map for all channels preserves their correlation.
  const auto [mn_it, mx_it] =
      std::minmax_element(img.data.begin(), img.data.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx - mn < 1e-12) {
    std::fill(img.data.begin(), img.data.end(), 0.5);
    return img;
  }
  for (double& v : img.data) v = 0.1 + 0.8 * (v - mn) / (mx - mn);
  return img;
}

SynthPair MakeSynthPair(const ImageF& base, const PairSpec& spec,
                        uint64_t seed) {
  spec.Validate();
  DSIN_REQUIRE(base.c == 3, "MakeSynthPair: base must be 3-channel");
  DSIN_REQUIRE(base.h >= kCorrPatch && base.w >= kCorrPatch,
               "MakeSynthPair: base smaller than the correlation patch");

  constexpr int kAttempts = 8;
  constexpr int kBisections = 60;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Rng rng(Rng::Mix(seed, 0x73796e7468 + attempt));

    Geometry geo;
    const int t = static_cast<int>(std::llround(spec.translation_px));
    if (t > 0) {
      geo.dy = static_cast<int>(rng.Below(2 * t + 1)) - t;
      geo.dx = static_cast<int>(rng.Below(2 * t + 1)) - t;
    }
    geo.jitter = spec.affine_jitter;

    ImageF y = base;
    if (spec.photometric_gain > 0.0 || spec.photometric_bias > 0.0) {
      const double gain =
          1.0 + rng.Uniform(-spec.photometric_gain, spec.photometric_gain);
      const double bias =
          rng.Uniform(-spec.photometric_bias, spec.photometric_bias);
      for (double& v : y.data) v = std::clamp(gain * v + bias, 0.0, 1.0);
    }
    y = geo.Apply(y);
    PaintOcclusions(&y, spec.occlusion_fraction, rng);

    std::vector<double> unit_noise(y.data.size(), 0.0);
    for (double& n : unit_noise) n = rng.Normal();

    auto corr_at = [&](double sigma) {
      const ImageF aligned = geo.Invert(AddScaledNoise(y, unit_noise, sigma));
      return AvgPatchPearson(base, aligned, kCorrPatch, kCorrPatch);
    };
    auto finish = [&](double sigma, double corr) {
      SynthPair out;
      out.x = base;
      out.y = AddScaledNoise(y, unit_noise, sigma);
      out.achieved_correlation = corr;
      out.dy = geo.dy;
      out.dx = geo.dx;
      out.noise_sigma = sigma;
      return out;
    };

    const double c0 = corr_at(0.0);
    if (c0 < spec.corr_lo) continue;  // already below the band without noise
    if (c0 <= spec.corr_hi) return finish(0.0, c0);

    // Noise only decorrelates, so grow sigma past the band, then bisect
    // into it on this fixed noise field.
    double lo = 0.0;
    double hi = std::max(spec.noise_sigma, 0.05);
    double c_hi = corr_at(hi);
    for (int i = 0; i < 10 && c_hi > spec.corr_hi; ++i) {
      lo = hi;
      hi *= 2.0;
      c_hi = corr_at(hi);
    }
    if (c_hi > spec.corr_hi) continue;

    double sigma = hi, corr = c_hi;
    bool landed = corr >= spec.corr_lo;
    for (int i = 0; i < kBisections && !landed; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double c = corr_at(mid);
      if (c > spec.corr_hi) {
        lo = mid;
      } else if (c < spec.corr_lo) {
        hi = mid;
      } else {
        sigma = mid;
        corr = c;
        landed = true;
      }
    }
    if (landed) return finish(sigma, corr);
  }
  throw DomainError(
      "MakeSynthPair: correlation band [" + std::to_string(spec.corr_lo) +
      ", " + std::to_string(spec.corr_hi) +
      "] unreachable for this base image and perturbation settings");
}

}  // namespace dsin
