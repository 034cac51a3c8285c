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

#ifndef DSIN_TENSOR_H_
#define DSIN_TENSOR_H_

#include <cstdint>
#include <numeric>
#include <vector>

#include "dsin/base.h"
#include "dsin/image.h"
#include "dsin/rng.h"

namespace dsin {

// Dense row-major tensor of doubles. Feature maps use shape {c, h, w},
// conv weights {c_out, c_in, kh, kw}, vectors {n}, scalars {1}.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(NumEl(shape), 0.0);
  }

  static int64_t NumEl(const std::vector<int>& s) {
    int64_t n = 1;
    for (int d : s) {
      DSIN_REQUIRE(d > 0, "Tensor: dimensions must be positive");
      n *= d;
    }
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  bool SameShape(const Tensor& o) const { return shape == o.shape; }
  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape == b.shape && a.v == b.v;
  }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  static Tensor Scalar(double x) {
    Tensor t({1});
    t.v[0] = x;
    return t;
  }

  static Tensor Full(std::vector<int> s, double x) {
    Tensor t(std::move(s));
    std::fill(t.v.begin(), t.v.end(), x);
    return t;
  }

  static Tensor Randn(std::vector<int> s, Rng& rng, double stddev) {
    Tensor t(std::move(s));
    for (auto& x : t.v) x = rng.Normal() * stddev;
    return t;
  }
};

// {c, h, w} tensor from a planar float image and back.
inline Tensor FromImage(const ImageF& img) {
  Tensor t({img.c, img.h, img.w});
  t.v = img.data;
  return t;
}

inline ImageF ToImage(const Tensor& t) {
  DSIN_REQUIRE(t.shape.size() == 3, "ToImage: want a {c,h,w} tensor");
  ImageF img(t.shape[1], t.shape[2], t.shape[0]);
  img.data = t.v;
  return img;
}

}  // namespace dsin

#endif  // DSIN_TENSOR_H_
