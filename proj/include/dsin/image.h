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

#ifndef DSIN_IMAGE_H_
#define DSIN_IMAGE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dsin/base.h"

namespace dsin {

// 8-bit raster at the I/O boundary, interleaved H x W x C.
struct ImageU8 {
  int h = 0, w = 0, c = 0;
  std::vector<uint8_t> data;

  ImageU8() = default;
  ImageU8(int h_, int w_, int c_) : h(h_), w(w_), c(c_) {
    DSIN_REQUIRE(h_ > 0 && w_ > 0 && c_ > 0, "ImageU8: bad dimensions");
    data.assign(size_t(h_) * w_ * c_, 0);
  }
  uint8_t& At(int y, int x, int ch) {
    return data[(size_t(y) * w + x) * c + ch];
  }
  uint8_t At(int y, int x, int ch) const {
    return data[(size_t(y) * w + x) * c + ch];
  }
};

// Unit-interval real image, planar (channel, row, col), double precision.
struct ImageF {
  int h = 0, w = 0, c = 0;
  std::vector<double> data;

  ImageF() = default;
  ImageF(int h_, int w_, int c_) : h(h_), w(w_), c(c_) {
    DSIN_REQUIRE(h_ > 0 && w_ > 0 && c_ > 0, "ImageF: bad dimensions");
    data.assign(size_t(h_) * w_ * c_, 0.0);
  }
  double* Plane(int ch) { return data.data() + size_t(ch) * h * w; }
  const double* Plane(int ch) const { return data.data() + size_t(ch) * h * w; }
  double& At(int ch, int y, int x) {
    return data[(size_t(ch) * h + y) * w + x];
  }
  double At(int ch, int y, int x) const {
    return data[(size_t(ch) * h + y) * w + x];
  }
  bool SameShape(const ImageF& o) const {
    return h == o.h && w == o.w && c == o.c;
  }
};

ImageF ToFloat(const ImageU8& img);          // u8 / 255
ImageU8 ToU8(const ImageF& img);             // clamp to [0,1], round to u8
ImageF ClampUnit(const ImageF& img);

// Rec.601 luma projection of an RGB image; identity for 1-channel input.
ImageF Luma(const ImageF& img);

// Symmetric (edge-mirroring) pad on the bottom/right up to a multiple of
// `multiple`. Returns the input unchanged when already aligned.
ImageF PadToMultiple(const ImageF& img, int multiple);
ImageF PadToMultipleOf(const ImageF& img, int mult_h, int mult_w);
ImageF CropTo(const ImageF& img, int h, int w);

// Cyclic shift; positive dy moves content down, positive dx right.
ImageF Roll(const ImageF& img, int dy, int dx);

ImageU8 ReadPng(const std::string& path);
void WritePng(const std::string& path, const ImageU8& img);

}  // namespace dsin

#endif  // DSIN_IMAGE_H_
