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

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "dsin/autodiff.h"
#include "dsin/rng.h"

namespace dsin {
namespace {

using ad::Var;

// Central-difference check of d(scalar)/d(inputs[wrt]) against the tape.
// build() must construct a fresh graph from leaf vars each call.
double FdMaxRelError(
    const std::function<Var(std::vector<Var>&)>& build,
    std::vector<Tensor> inputs, int wrt, double h = 1e-5) {
  std::vector<Var> leaves;
  for (const Tensor& t : inputs) leaves.push_back(ad::MakeVar(t, true));
  Var loss = build(leaves);
  ad::Backward(loss);
  Tensor analytic = leaves[wrt]->grad.v.empty() ? Tensor(inputs[wrt].shape)
                                                : leaves[wrt]->grad;

  double worst = 0.0;
  for (int64_t i = 0; i < inputs[wrt].size(); ++i) {
    auto eval = [&](double delta) {
      std::vector<Tensor> shifted = inputs;
      shifted[wrt].v[i] += delta;
      std::vector<Var> vs;
      for (const Tensor& t : shifted) vs.push_back(ad::MakeVar(t, true));
      return build(vs)->value.v[0];
    };
    const double numeric = (eval(h) - eval(-h)) / (2.0 * h);
    const double a = analytic.v[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

Tensor RandT(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& x : t.v) x = rng.Normal() * scale;
  return t;
}

// Direct convolution written from the definition, used as the oracle for
// the im2col-based implementation.
Tensor NaiveConv(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
                 int dilation, int pad) {
  const int cin = x.shape[0], h = x.shape[1], wd = x.shape[2];
  const int cout = w.shape[0], kh = w.shape[2], kw = w.shape[3];
  const int hout = (h + 2 * pad - dilation * (kh - 1) - 1) / stride + 1;
  const int wout = (wd + 2 * pad - dilation * (kw - 1) - 1) / stride + 1;
  Tensor y({cout, hout, wout});
  for (int co = 0; co < cout; ++co) {
    for (int oy = 0; oy < hout; ++oy) {
      for (int ox = 0; ox < wout; ++ox) {
        double acc = b.v.empty() ? 0.0 : b.v[co];
        for (int ci = 0; ci < cin; ++ci) {
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy * stride - pad + ky * dilation;
              const int ix = ox * stride - pad + kx * dilation;
              if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
              acc += x.v[(static_cast<int64_t>(ci) * h + iy) * wd + ix] *
                     w.v[((static_cast<int64_t>(co) * cin + ci) * kh + ky) * kw +
                         kx];
            }
          }
        }
        y.v[(static_cast<int64_t>(co) * hout + oy) * wout + ox] = acc;
      }
    }
  }
  return y;
}

TEST_CASE("conv2d forward matches the naive definition") {
  Rng rng(3);
  struct Case {
    int stride, dilation, pad;
  };
  for (Case c : {Case{1, 1, 1}, Case{2, 1, 1}, Case{1, 2, 2}, Case{2, 1, 0}}) {
    Tensor x = RandT({3, 9, 11}, rng);
    Tensor w = RandT({4, 3, 3, 3}, rng);
    Tensor b = RandT({4}, rng);
    Var y = ad::Conv2d(ad::MakeVar(x, false), ad::MakeVar(w, false),
                       ad::MakeVar(b, false), c.stride, c.dilation, c.pad);
    Tensor ref = NaiveConv(x, w, b, c.stride, c.dilation, c.pad);
    REQUIRE(y->value.shape == ref.shape);
    for (int64_t i = 0; i < ref.size(); ++i) {
      CHECK(y->value.v[i] == doctest::Approx(ref.v[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv2d gradients pass finite differences") {
  Rng rng(4);
  Tensor x = RandT({2, 6, 7}, rng);
  Tensor w = RandT({3, 2, 3, 3}, rng, 0.5);
  Tensor b = RandT({3}, rng, 0.1);
  Tensor probe = RandT({3, 3, 4}, rng);  // stride 2, pad 1 output is 3x4
  auto build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::Conv2d(v[0], v[1], v[2], 2, 1, 1), probe);
  };
  CHECK(FdMaxRelError(build, {x, w, b}, 0) < 1e-6);
  CHECK(FdMaxRelError(build, {x, w, b}, 1) < 1e-6);
  CHECK(FdMaxRelError(build, {x, w, b}, 2) < 1e-6);
}

TEST_CASE("dilated conv gradients pass finite differences") {
  Rng rng(5);
  Tensor x = RandT({2, 8, 8}, rng);
  Tensor w = RandT({2, 2, 3, 3}, rng, 0.5);
  Tensor b = RandT({2}, rng, 0.1);
  Tensor probe = RandT({2, 8, 8}, rng);
  auto build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::Conv2d(v[0], v[1], v[2], 1, 2, 2), probe);
  };
  CHECK(FdMaxRelError(build, {x, w, b}, 0) < 1e-6);
  CHECK(FdMaxRelError(build, {x, w, b}, 1) < 1e-6);
}

TEST_CASE("upsample, lrelu, add, concat, crop, scale pass finite differences") {
  Rng rng(6);
  Tensor a = RandT({2, 3, 4}, rng);
  Tensor b = RandT({2, 3, 4}, rng);
  // Keep values away from the lrelu kink so central differences are valid.
  for (auto& v : a.v) {
    if (std::abs(v) < 0.05) v = v < 0 ? v - 0.1 : v + 0.1;
  }
  Tensor probe6 = RandT({4, 3, 4}, rng);
  Tensor probe_up = RandT({2, 6, 8}, rng);
  Tensor probe_crop = RandT({2, 2, 3}, rng);

  auto concat_build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::ConcatC(v[0], v[1]), probe6);
  };
  CHECK(FdMaxRelError(concat_build, {a, b}, 0) < 1e-6);
  CHECK(FdMaxRelError(concat_build, {a, b}, 1) < 1e-6);

  auto up_build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::UpsampleNearest2(v[0]), probe_up);
  };
  CHECK(FdMaxRelError(up_build, {a}, 0) < 1e-6);

  auto lrelu_build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::LeakyRelu(v[0], 0.2), Tensor::Full({2, 3, 4}, 0.7));
  };
  CHECK(FdMaxRelError(lrelu_build, {a}, 0) < 1e-6);

  auto add_scale_build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::Scale(ad::Add(v[0], v[1]), -1.7),
                     Tensor::Full({2, 3, 4}, 0.3));
  };
  CHECK(FdMaxRelError(add_scale_build, {a, b}, 0) < 1e-6);
  CHECK(FdMaxRelError(add_scale_build, {a, b}, 1) < 1e-6);

  auto crop_build = [&](std::vector<Var>& v) {
    return ad::Inner(ad::Crop(v[0], 2, 3), probe_crop);
  };
  CHECK(FdMaxRelError(crop_build, {a}, 0) < 1e-6);
}

TEST_CASE("soft rate gradients pass finite differences for all three inputs") {
  Rng rng(7);
  Tensor z = RandT({2, 3, 3}, rng);
  Tensor centers({4});
  centers.v = {-1.5, -0.5, 0.5, 1.5};
  Tensor logits = RandT({2, 4}, rng, 0.5);
  auto build = [&](std::vector<Var>& v) {
    return ad::SoftRateBits(v[0], v[1], v[2], 0.5, 1e-9);
  };
  CHECK(FdMaxRelError(build, {z, centers, logits}, 0, 1e-6) < 1e-5);
  CHECK(FdMaxRelError(build, {z, centers, logits}, 1, 1e-6) < 1e-5);
  CHECK(FdMaxRelError(build, {z, centers, logits}, 2, 1e-6) < 1e-5);
}

TEST_CASE("soft rate approaches the hard cross-entropy rate as tau shrinks") {
  Tensor z({1, 2, 2});
  z.v = {-1.0, -1.0, 1.0, 0.98};  // all clearly nearest one center
  Tensor centers({2});
  centers.v = {-1.0, 1.0};
  Tensor logits({1, 2});
  logits.v = {std::log(0.25), std::log(0.75)};
  Var bits = ad::SoftRateBits(ad::MakeVar(z, false), ad::MakeVar(centers, false),
                              ad::MakeVar(logits, false), 1e-3, 1e-9);
  const double expect = 2 * (-std::log2(0.25)) + 2 * (-std::log2(0.75));
  CHECK(bits->value.v[0] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("ste quantizer snaps values and passes gradient through unchanged") {
  Tensor z({1, 2, 3});
  z.v = {-2.0, -0.2, 0.0, 0.26, 0.5, 3.0};
  std::vector<double> centers = {-1.0, 0.0, 1.0};
  std::vector<int> symbols;
  Var zv = ad::MakeVar(z, true);
  Var q = ad::QuantizeSte(zv, centers, &symbols);
  CHECK(q->value.v == std::vector<double>{-1.0, 0.0, 0.0, 0.0, 0.0, 1.0});
  // 0.5 ties between centers 0.0 and 1.0; the lower index wins.
  CHECK(symbols == std::vector<int>{0, 1, 1, 1, 1, 2});

  Tensor probe({1, 2, 3});
  probe.v = {1, 2, 3, 4, 5, 6};
  ad::Backward(ad::Inner(q, probe));
  CHECK(zv->grad.v == probe.v);
}

TEST_CASE("l1, hinge and scalar ops pass finite differences") {
  Rng rng(8);
  Tensor a = RandT({3, 4}, rng);
  Tensor b = RandT({3, 4}, rng);
  auto l1_build = [&](std::vector<Var>& v) { return ad::L1Loss(v[0], v[1]); };
  CHECK(FdMaxRelError(l1_build, {a, b}, 0) < 1e-6);
  CHECK(FdMaxRelError(l1_build, {a, b}, 1) < 1e-6);

  Tensor s = Tensor::Scalar(0.37);
  auto hinge_build = [&](std::vector<Var>& v) {
    return ad::AddScalar(ad::HingeAbove(v[0], 0.1), ad::Scale(v[0], 2.0));
  };
  CHECK(FdMaxRelError(hinge_build, {s}, 0) < 1e-6);
  Tensor below = Tensor::Scalar(0.05);
  Var below_v = ad::MakeVar(below, true);
  ad::Backward(ad::HingeAbove(below_v, 0.1));
  CHECK(below_v->grad.v[0] == 0.0);
}

TEST_CASE("gradient accumulates across fan-out") {
  Tensor x = Tensor::Full({2, 2, 2}, 1.5);
  Var xv = ad::MakeVar(x, true);
  Var y = ad::Add(xv, xv);
  ad::Backward(ad::Inner(y, Tensor::Full({2, 2, 2}, 1.0)));
  for (double g : xv->grad.v) CHECK(g == doctest::Approx(2.0));
}

TEST_CASE("no-grad regions block gradient flow") {
  Tensor x = Tensor::Full({1, 2, 2}, 0.5);
  Var xv = ad::MakeVar(x, true);
  Var mid;
  {
    ad::NoGradGuard guard;
    CHECK_FALSE(ad::GradEnabled());
    mid = ad::Scale(xv, 3.0);
  }
  CHECK(ad::GradEnabled());
  Var loss = ad::Inner(mid, Tensor::Full({1, 2, 2}, 1.0));
  ad::Backward(loss);
  CHECK(xv->grad.v.empty());
  CHECK(mid->parents.empty());
}

TEST_CASE("adam drives a simple objective toward its minimum") {
  ad::ParamStore store;
  Rng rng(9);
  Var p = store.Create("p", RandT({8}, rng));
  ad::Adam opt(ad::AdamConfig{.lr = 0.05});
  Tensor target = Tensor({8});
  for (int step = 0; step < 400; ++step) {
    store.ZeroGrad();
    ad::Backward(ad::L1Loss(p, ad::Constant(target)));
    opt.Step(store);
  }
  for (double v : p->value.v) CHECK(std::abs(v) < 0.06);
}

TEST_CASE("param store keeps insertion order and rejects duplicates") {
  ad::ParamStore store;
  store.Create("b", Tensor::Scalar(1));
  store.Create("a", Tensor::Scalar(2));
  CHECK(store.Names() == std::vector<std::string>{"b", "a"});
  CHECK_THROWS_AS(store.Create("a", Tensor::Scalar(3)), DomainError);
  CHECK(store.TotalCount() == 2);
  auto snap = store.Snapshot();
  snap["a"].v[0] = 42;
  store.Load(snap);
  CHECK(store.Get("a")->value.v[0] == 42);
}

}  // namespace
}  // namespace dsin
