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

#include "dsin/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace dsin {

ImageF ToFloat(const ImageU8& img) {
  ImageF out(img.h, img.w, img.c);
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < img.h; ++y) {
      for (int x = 0; x < img.w; ++x) {
        out.At(ch, y, x) = img.At(y, x, ch) / 255.0;
      }
    }
  }
  return out;
}

ImageU8 ToU8(const ImageF& img) {
  ImageU8 out(img.h, img.w, img.c);
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < img.h; ++y) {
      for (int x = 0; x < img.w; ++x) {
        const double v = std::clamp(img.At(ch, y, x), 0.0, 1.0);
        out.At(y, x, ch) = static_cast<uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return out;
}

ImageF ClampUnit(const ImageF& img) {
  ImageF out = img;
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

ImageF Luma(const ImageF& img) {
  if (img.c == 1) return img;
  DSIN_REQUIRE(img.c == 3, "Luma: expected 1 or 3 channels");
  ImageF out(img.h, img.w, 1);
  const double* r = img.Plane(0);
  const double* g = img.Plane(1);
  const double* b = img.Plane(2);
  double* l = out.Plane(0);
  const size_t n = size_t(img.h) * img.w;
  for (size_t i = 0; i < n; ++i) {
    l[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
  }
  return out;
}

namespace {

// Symmetric mirror index: 0,1,...,n-1,n-1,...,1,0,0,1,... for any i >= 0.
int MirrorIndex(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

}  // namespace

ImageF PadToMultipleOf(const ImageF& img, int mult_h, int mult_w) {
  DSIN_REQUIRE(mult_h >= 1 && mult_w >= 1, "PadToMultipleOf: bad multiple");
  const int nh = int(CeilDiv(img.h, mult_h)) * mult_h;
  const int nw = int(CeilDiv(img.w, mult_w)) * mult_w;
  if (nh == img.h && nw == img.w) return img;
  ImageF out(nh, nw, img.c);
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < nh; ++y) {
      const int sy = MirrorIndex(y, img.h);
      for (int x = 0; x < nw; ++x) {
        out.At(ch, y, x) = img.At(ch, sy, MirrorIndex(x, img.w));
      }
    }
  }
  return out;
}

ImageF PadToMultiple(const ImageF& img, int multiple) {
  return PadToMultipleOf(img, multiple, multiple);
}

ImageF CropTo(const ImageF& img, int h, int w) {
  DSIN_REQUIRE(h >= 1 && w >= 1 && h <= img.h && w <= img.w,
               "CropTo: crop exceeds image");
  if (h == img.h && w == img.w) return img;
  ImageF out(h, w, img.c);
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.At(ch, y, x) = img.At(ch, y, x);
    }
  }
  return out;
}

ImageF Roll(const ImageF& img, int dy, int dx) {
  ImageF out(img.h, img.w, img.c);
  auto wrap = [](int i, int n) {
    int m = i % n;
    return m < 0 ? m + n : m;
  };
  for (int ch = 0; ch < img.c; ++ch) {
    for (int y = 0; y < img.h; ++y) {
      for (int x = 0; x < img.w; ++x) {
        out.At(ch, wrap(y + dy, img.h), wrap(x + dx, img.w)) =
            img.At(ch, y, x);
      }
    }
  }
  return out;
}

ImageU8 ReadPng(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"),
                                           std::fclose);
  DSIN_CHECK(fp != nullptr, "cannot open " + path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  DSIN_CHECK(png != nullptr, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  ImageU8 out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CorruptStreamError("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_expand(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  const int h = int(png_get_image_height(png, info));
  const int w = int(png_get_image_width(png, info));
  const int c = int(png_get_channels(png, info));
  DSIN_CHECK(c == 1 || c == 3, "unsupported PNG channel count");
  out = ImageU8(h, w, c);
  rows.resize(h);
  for (int y = 0; y < h; ++y) {
    rows[y] = out.data.data() + size_t(y) * w * c;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void WritePng(const std::string& path, const ImageU8& img) {
  DSIN_REQUIRE(img.c == 1 || img.c == 3, "WritePng: expected 1 or 3 channels");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"),
                                           std::fclose);
  DSIN_CHECK(fp != nullptr, "cannot open for write: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  DSIN_CHECK(png != nullptr, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.w, img.h, 8,
               img.c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.h);
  std::vector<uint8_t> buf = img.data;
  for (int y = 0; y < img.h; ++y) {
    rows[y] = buf.data() + size_t(y) * img.w * img.c;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace dsin
