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

#include "dsin/autodiff.h"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace dsin {
namespace ad {

namespace {

std::atomic<int64_t> g_next_id{1};
thread_local int g_no_grad_depth = 0;

using MatRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

Var NewNode(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->id = g_next_id.fetch_add(1);
  return n;
}

// Records parents and the backward closure unless grads are globally off.
void Record(const Var& out, std::vector<Var> parents,
            std::function<void()> backward) {
  if (!GradEnabled()) return;
  out->parents = std::move(parents);
  out->backward = std::move(backward);
}

struct ConvDims {
  int cin, h, w, cout, kh, kw, hout, wout;
};

ConvDims ConvShape(const Tensor& x, const Tensor& w, int stride, int dilation,
                   int pad) {
  DSIN_REQUIRE(x.shape.size() == 3, "Conv2d: input must be {c,h,w}");
  DSIN_REQUIRE(w.shape.size() == 4, "Conv2d: weight must be {cout,cin,kh,kw}");
  DSIN_REQUIRE(stride >= 1 && dilation >= 1 && pad >= 0,
               "Conv2d: bad stride/dilation/pad");
  ConvDims d;
  d.cin = x.shape[0];
  d.h = x.shape[1];
  d.w = x.shape[2];
  d.cout = w.shape[0];
  d.kh = w.shape[2];
  d.kw = w.shape[3];
  DSIN_REQUIRE(w.shape[1] == d.cin, "Conv2d: channel mismatch");
  d.hout = (d.h + 2 * pad - dilation * (d.kh - 1) - 1) / stride + 1;
  d.wout = (d.w + 2 * pad - dilation * (d.kw - 1) - 1) / stride + 1;
  DSIN_REQUIRE(d.hout >= 1 && d.wout >= 1, "Conv2d: output collapses to zero");
  return d;
}

// cols is (cin*kh*kw) x (hout*wout), row-major.
void Im2Col(const Tensor& x, const ConvDims& d, int stride, int dilation,
            int pad, std::vector<double>* cols) {
  const int n = d.hout * d.wout;
  cols->assign(static_cast<size_t>(d.cin) * d.kh * d.kw * n, 0.0);
  for (int ci = 0; ci < d.cin; ++ci) {
    const double* plane = x.data() + static_cast<int64_t>(ci) * d.h * d.w;
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        double* row =
            cols->data() +
            (static_cast<int64_t>(ci) * d.kh * d.kw + ky * d.kw + kx) * n;
        for (int oy = 0; oy < d.hout; ++oy) {
          const int iy = oy * stride - pad + ky * dilation;
          if (iy < 0 || iy >= d.h) continue;
          for (int ox = 0; ox < d.wout; ++ox) {
            const int ix = ox * stride - pad + kx * dilation;
            if (ix < 0 || ix >= d.w) continue;
            row[oy * d.wout + ox] = plane[iy * d.w + ix];
          }
        }
      }
    }
  }
}

void Col2Im(const std::vector<double>& cols, const ConvDims& d, int stride,
            int dilation, int pad, Tensor* dx) {
  const int n = d.hout * d.wout;
  for (int ci = 0; ci < d.cin; ++ci) {
    double* plane = dx->data() + static_cast<int64_t>(ci) * d.h * d.w;
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        const double* row =
            cols.data() +
            (static_cast<int64_t>(ci) * d.kh * d.kw + ky * d.kw + kx) * n;
        for (int oy = 0; oy < d.hout; ++oy) {
          const int iy = oy * stride - pad + ky * dilation;
          if (iy < 0 || iy >= d.h) continue;
          for (int ox = 0; ox < d.wout; ++ox) {
            const int ix = ox * stride - pad + kx * dilation;
            if (ix < 0 || ix >= d.w) continue;
            plane[iy * d.w + ix] += row[oy * d.wout + ox];
          }
        }
      }
    }
  }
}

void SoftAssign(const double* z, int64_t count, const double* centers, int L,
                double tau, std::vector<double>* q) {
  q->resize(static_cast<size_t>(count) * L);
  std::vector<double> s(L);
  for (int64_t i = 0; i < count; ++i) {
    double mx = -1e300;
    for (int k = 0; k < L; ++k) {
      const double diff = z[i] - centers[k];
      s[k] = -(diff * diff) / tau;
      mx = std::max(mx, s[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < L; ++k) {
      s[k] = std::exp(s[k] - mx);
      sum += s[k];
    }
    double* qi = q->data() + i * L;
    for (int k = 0; k < L; ++k) qi[k] = s[k] / sum;
  }
}

}  // namespace

Var MakeVar(Tensor value, bool requires_grad) {
  Var v = NewNode(std::move(value));
  v->requires_grad = requires_grad;
  return v;
}

Var Constant(Tensor value) { return MakeVar(std::move(value), false); }

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool GradEnabled() { return g_no_grad_depth == 0; }

void Backward(const Var& root) {
  DSIN_REQUIRE(root && root->value.size() == 1,
               "Backward: root must be a scalar node");
  // Reachable subgraph, then reverse creation order. Creation order is a
  // valid topological order because parents always exist before children.
  std::vector<Node*> nodes;
  std::unordered_set<const Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& p : n->parents) {
      if (seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });
  root->EnsureGrad();
  root->grad.v[0] += 1.0;
  for (Node* n : nodes) {
    if (n->backward && !n->grad.v.empty()) n->backward();
  }
}

Var Conv2d(const Var& x, const Var& w, const Var& b, int stride, int dilation,
           int pad) {
  const ConvDims d = ConvShape(x->value, w->value, stride, dilation, pad);
  if (b) {
    DSIN_REQUIRE(b->value.shape == std::vector<int>{d.cout},
                 "Conv2d: bias must be {cout}");
  }
  const int n = d.hout * d.wout;
  const int k = d.cin * d.kh * d.kw;

  std::vector<double> cols;
  Im2Col(x->value, d, stride, dilation, pad, &cols);
  Tensor y({d.cout, d.hout, d.wout});
  {
    CMapM wm(w->value.data(), d.cout, k);
    CMapM cm(cols.data(), k, n);
    MapM ym(y.data(), d.cout, n);
    ym.noalias() = wm * cm;
  }
  if (b) {
    for (int co = 0; co < d.cout; ++co) {
      double* row = y.data() + static_cast<int64_t>(co) * n;
      const double bv = b->value.v[co];
      for (int i = 0; i < n; ++i) row[i] += bv;
    }
  }
  Var out = NewNode(std::move(y));
  std::vector<Var> parents = b ? std::vector<Var>{x, w, b}
                               : std::vector<Var>{x, w};
  Node* o = out.get();
  Record(out, parents, [o, x, w, b, d, stride, dilation, pad]() {
    const int n = d.hout * d.wout;
    const int k = d.cin * d.kh * d.kw;
    // im2col is recomputed here instead of captured; graphs in this
    // project are rebuilt every step, so trading FLOPs for memory wins.
    std::vector<double> cols;
    Im2Col(x->value, d, stride, dilation, pad, &cols);

    w->EnsureGrad();
    {
      CMapM gy(o->grad.data(), d.cout, n);
      CMapM cm(cols.data(), k, n);
      MapM gw(w->grad.data(), d.cout, k);
      gw.noalias() += gy * cm.transpose();
    }
    x->EnsureGrad();
    {
      std::vector<double> dcols(static_cast<size_t>(k) * n);
      CMapM wm(w->value.data(), d.cout, k);
      CMapM gy(o->grad.data(), d.cout, n);
      MapM dc(dcols.data(), k, n);
      dc.noalias() = wm.transpose() * gy;
      Col2Im(dcols, d, stride, dilation, pad, &x->grad);
    }
    if (b) {
      b->EnsureGrad();
      for (int co = 0; co < d.cout; ++co) {
        const double* row = o->grad.data() + static_cast<int64_t>(co) * n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += row[i];
        b->grad.v[co] += s;
      }
    }
  });
  return out;
}

Var UpsampleNearest2(const Var& x) {
  DSIN_REQUIRE(x->value.shape.size() == 3, "UpsampleNearest2: want {c,h,w}");
  const int c = x->value.shape[0], h = x->value.shape[1], w = x->value.shape[2];
  Tensor y({c, 2 * h, 2 * w});
  for (int ci = 0; ci < c; ++ci) {
    const double* in = x->value.data() + static_cast<int64_t>(ci) * h * w;
    double* out = y.data() + static_cast<int64_t>(ci) * 4 * h * w;
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        const double v = in[iy * w + ix];
        double* p = out + (2 * iy) * (2 * w) + 2 * ix;
        p[0] = v;
        p[1] = v;
        p[2 * w] = v;
        p[2 * w + 1] = v;
      }
    }
  }
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {x}, [o, x, c, h, w]() {
    x->EnsureGrad();
    for (int ci = 0; ci < c; ++ci) {
      double* gin = x->grad.data() + static_cast<int64_t>(ci) * h * w;
      const double* gout = o->grad.data() + static_cast<int64_t>(ci) * 4 * h * w;
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
          const double* p = gout + (2 * iy) * (2 * w) + 2 * ix;
          gin[iy * w + ix] += p[0] + p[1] + p[2 * w] + p[2 * w + 1];
        }
      }
    }
  });
  return out;
}

Var LeakyRelu(const Var& x, double alpha) {
  Tensor y(x->value.shape);
  for (int64_t i = 0; i < y.size(); ++i) {
    const double v = x->value.v[i];
    y.v[i] = v > 0.0 ? v : alpha * v;
  }
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {x}, [o, x, alpha]() {
    x->EnsureGrad();
    for (int64_t i = 0; i < o->grad.size(); ++i) {
      x->grad.v[i] += (x->value.v[i] > 0.0 ? 1.0 : alpha) * o->grad.v[i];
    }
  });
  return out;
}

Var Add(const Var& a, const Var& b) {
  DSIN_REQUIRE(a->value.SameShape(b->value), "Add: shape mismatch");
  Tensor y(a->value.shape);
  for (int64_t i = 0; i < y.size(); ++i) y.v[i] = a->value.v[i] + b->value.v[i];
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {a, b}, [o, a, b]() {
    a->EnsureGrad();
    b->EnsureGrad();
    for (int64_t i = 0; i < o->grad.size(); ++i) {
      a->grad.v[i] += o->grad.v[i];
      b->grad.v[i] += o->grad.v[i];
    }
  });
  return out;
}

Var ConcatC(const Var& a, const Var& b) {
  DSIN_REQUIRE(a->value.shape.size() == 3 && b->value.shape.size() == 3 &&
                   a->value.shape[1] == b->value.shape[1] &&
                   a->value.shape[2] == b->value.shape[2],
               "ConcatC: want {c,h,w} with matching h,w");
  const int ca = a->value.shape[0], cb = b->value.shape[0];
  const int h = a->value.shape[1], w = a->value.shape[2];
  const int64_t plane = static_cast<int64_t>(h) * w;
  Tensor y({ca + cb, h, w});
  std::copy(a->value.v.begin(), a->value.v.end(), y.v.begin());
  std::copy(b->value.v.begin(), b->value.v.end(), y.v.begin() + ca * plane);
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {a, b}, [o, a, b, ca, cb, plane]() {
    a->EnsureGrad();
    b->EnsureGrad();
    for (int64_t i = 0; i < ca * plane; ++i) a->grad.v[i] += o->grad.v[i];
    for (int64_t i = 0; i < cb * plane; ++i) {
      b->grad.v[i] += o->grad.v[ca * plane + i];
    }
  });
  return out;
}

Var Crop(const Var& x, int oh, int ow) {
  DSIN_REQUIRE(x->value.shape.size() == 3, "Crop: want {c,h,w}");
  const int c = x->value.shape[0], h = x->value.shape[1], w = x->value.shape[2];
  DSIN_REQUIRE(oh >= 1 && ow >= 1 && oh <= h && ow <= w,
               "Crop: target exceeds input");
  Tensor y({c, oh, ow});
  for (int ci = 0; ci < c; ++ci) {
    for (int iy = 0; iy < oh; ++iy) {
      const double* src =
          x->value.data() + (static_cast<int64_t>(ci) * h + iy) * w;
      std::copy(src, src + ow,
                y.data() + (static_cast<int64_t>(ci) * oh + iy) * ow);
    }
  }
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {x}, [o, x, c, h, w, oh, ow]() {
    x->EnsureGrad();
    for (int ci = 0; ci < c; ++ci) {
      for (int iy = 0; iy < oh; ++iy) {
        const double* g = o->grad.data() + (static_cast<int64_t>(ci) * oh + iy) * ow;
        double* dst = x->grad.data() + (static_cast<int64_t>(ci) * h + iy) * w;
        for (int ix = 0; ix < ow; ++ix) dst[ix] += g[ix];
      }
    }
  });
  return out;
}

Var Scale(const Var& x, double s) {
  Tensor y(x->value.shape);
  for (int64_t i = 0; i < y.size(); ++i) y.v[i] = s * x->value.v[i];
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {x}, [o, x, s]() {
    x->EnsureGrad();
    for (int64_t i = 0; i < o->grad.size(); ++i) {
      x->grad.v[i] += s * o->grad.v[i];
    }
  });
  return out;
}

Var QuantizeSte(const Var& x, const std::vector<double>& centers,
                std::vector<int>* symbols) {
  DSIN_REQUIRE(!centers.empty(), "QuantizeSte: empty center set");
  Tensor y(x->value.shape);
  if (symbols) symbols->resize(x->value.size());
  const int L = static_cast<int>(centers.size());
  for (int64_t i = 0; i < y.size(); ++i) {
    const double v = x->value.v[i];
    int best = 0;
    double best_d = std::abs(v - centers[0]);
    for (int k = 1; k < L; ++k) {
      const double dk = std::abs(v - centers[k]);
      if (dk < best_d) {
        best_d = dk;
        best = k;
      }
    }
    y.v[i] = centers[best];
    if (symbols) (*symbols)[i] = best;
  }
  Var out = NewNode(std::move(y));
  Node* o = out.get();
  Record(out, {x}, [o, x]() {
    x->EnsureGrad();
    for (int64_t i = 0; i < o->grad.size(); ++i) {
      x->grad.v[i] += o->grad.v[i];
    }
  });
  return out;
}

Var SoftRateBits(const Var& z, const Var& centers, const Var& logits,
                 double tau, double prob_floor) {
  DSIN_REQUIRE(z->value.shape.size() == 3, "SoftRateBits: z must be {c,h,w}");
  DSIN_REQUIRE(centers->value.shape.size() == 1,
               "SoftRateBits: centers must be {L}");
  const int c = z->value.shape[0];
  const int L = centers->value.shape[0];
  DSIN_REQUIRE(logits->value.shape == (std::vector<int>{c, L}),
               "SoftRateBits: logits must be {c,L}");
  DSIN_REQUIRE(tau > 0.0, "SoftRateBits: tau must be positive");
  const int64_t plane = static_cast<int64_t>(z->value.shape[1]) * z->value.shape[2];
  const double ln2 = std::log(2.0);

  // Per-channel floored probabilities and their code lengths in bits.
  std::vector<double> p(static_cast<size_t>(c) * L);
  std::vector<double> r(static_cast<size_t>(c) * L);
  for (int ch = 0; ch < c; ++ch) {
    const double* lg = logits->value.data() + static_cast<int64_t>(ch) * L;
    double mx = -1e300;
    for (int k = 0; k < L; ++k) mx = std::max(mx, lg[k]);
    double sum = 0.0;
    for (int k = 0; k < L; ++k) {
      p[ch * L + k] = std::exp(lg[k] - mx);
      sum += p[ch * L + k];
    }
    for (int k = 0; k < L; ++k) {
      double pk = p[ch * L + k] / sum;
      pk = std::max(pk, prob_floor);
      p[ch * L + k] = pk;
      r[ch * L + k] = -std::log2(pk);
    }
  }

  double total = 0.0;
  std::vector<double> q;
  for (int ch = 0; ch < c; ++ch) {
    SoftAssign(z->value.data() + ch * plane, plane,
               centers->value.data(), L, tau, &q);
    const double* rc = r.data() + static_cast<int64_t>(ch) * L;
    for (int64_t i = 0; i < plane; ++i) {
      const double* qi = q.data() + i * L;
      for (int k = 0; k < L; ++k) total += qi[k] * rc[k];
    }
  }

  Var out = NewNode(Tensor::Scalar(total));
  Node* o = out.get();
  Record(out, {z, centers, logits},
         [o, z, centers, logits, tau, c, L, plane, p, r, ln2]() {
           const double g = o->grad.v[0];
           z->EnsureGrad();
           centers->EnsureGrad();
           logits->EnsureGrad();
           std::vector<double> q;
           for (int ch = 0; ch < c; ++ch) {
             const double* zc = z->value.data() + ch * plane;
             SoftAssign(zc, plane, centers->value.data(), L, tau, &q);
             const double* rc = r.data() + static_cast<int64_t>(ch) * L;
             const double* pc = p.data() + static_cast<int64_t>(ch) * L;
             double* gz = z->grad.data() + ch * plane;
             double* glg = logits->grad.data() + static_cast<int64_t>(ch) * L;
             for (int64_t i = 0; i < plane; ++i) {
               const double* qi = q.data() + i * L;
               double bits_i = 0.0;
               for (int k = 0; k < L; ++k) bits_i += qi[k] * rc[k];
               for (int k = 0; k < L; ++k) {
                 const double diff = zc[i] - centers->value.v[k];
                 const double common = qi[k] * (rc[k] - bits_i) * (2.0 * diff / tau);
                 gz[i] += g * (-common);
                 centers->grad.v[k] += g * common;
                 glg[k] += g * (pc[k] - qi[k]) / ln2;
               }
             }
           }
         });
  return out;
}

Var L1Loss(const Var& a, const Var& b) {
  DSIN_REQUIRE(a->value.SameShape(b->value), "L1Loss: shape mismatch");
  const int64_t n = a->value.size();
  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    total += std::abs(a->value.v[i] - b->value.v[i]);
  }
  Var out = NewNode(Tensor::Scalar(total / static_cast<double>(n)));
  Node* o = out.get();
  Record(out, {a, b}, [o, a, b, n]() {
    const double g = o->grad.v[0] / static_cast<double>(n);
    a->EnsureGrad();
    b->EnsureGrad();
    for (int64_t i = 0; i < n; ++i) {
      const double d = a->value.v[i] - b->value.v[i];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      a->grad.v[i] += g * s;
      b->grad.v[i] -= g * s;
    }
  });
  return out;
}

Var AddScalar(const Var& a, const Var& b) {
  DSIN_REQUIRE(a->value.size() == 1 && b->value.size() == 1,
               "AddScalar: want scalars");
  Var out = NewNode(Tensor::Scalar(a->value.v[0] + b->value.v[0]));
  Node* o = out.get();
  Record(out, {a, b}, [o, a, b]() {
    a->EnsureGrad();
    b->EnsureGrad();
    a->grad.v[0] += o->grad.v[0];
    b->grad.v[0] += o->grad.v[0];
  });
  return out;
}

Var HingeAbove(const Var& x, double threshold) {
  DSIN_REQUIRE(x->value.size() == 1, "HingeAbove: want a scalar");
  const double over = x->value.v[0] - threshold;
  Var out = NewNode(Tensor::Scalar(over > 0.0 ? over : 0.0));
  Node* o = out.get();
  Record(out, {x}, [o, x, threshold]() {
    x->EnsureGrad();
    if (x->value.v[0] > threshold) x->grad.v[0] += o->grad.v[0];
  });
  return out;
}

Var Inner(const Var& x, const Tensor& t) {
  DSIN_REQUIRE(x->value.SameShape(t), "Inner: shape mismatch");
  double s = 0.0;
  for (int64_t i = 0; i < t.size(); ++i) s += x->value.v[i] * t.v[i];
  Var out = NewNode(Tensor::Scalar(s));
  Node* o = out.get();
  Tensor tc = t;
  Record(out, {x}, [o, x, tc]() {
    x->EnsureGrad();
    for (int64_t i = 0; i < tc.size(); ++i) {
      x->grad.v[i] += o->grad.v[0] * tc.v[i];
    }
  });
  return out;
}

Var ParamStore::Create(const std::string& name, Tensor init) {
  DSIN_REQUIRE(!params_.count(name), "ParamStore: duplicate name " + name);
  Var v = MakeVar(std::move(init), true);
  names_.push_back(name);
  params_[name] = v;
  return v;
}

Var ParamStore::Get(const std::string& name) const {
  auto it = params_.find(name);
  DSIN_REQUIRE(it != params_.end(), "ParamStore: unknown param " + name);
  return it->second;
}

bool ParamStore::Has(const std::string& name) const {
  return params_.count(name) > 0;
}

void ParamStore::ZeroGrad() {
  for (auto& [name, v] : params_) {
    if (!v->grad.v.empty()) std::fill(v->grad.v.begin(), v->grad.v.end(), 0.0);
  }
}

int64_t ParamStore::TotalCount() const {
  int64_t n = 0;
  for (const auto& [name, v] : params_) n += v->value.size();
  return n;
}

std::map<std::string, Tensor> ParamStore::Snapshot() const {
  std::map<std::string, Tensor> out;
  for (const auto& [name, v] : params_) out[name] = v->value;
  return out;
}

void ParamStore::Load(const std::map<std::string, Tensor>& snapshot) {
  DSIN_REQUIRE(snapshot.size() == params_.size(),
               "ParamStore::Load: parameter set mismatch");
  for (const auto& [name, t] : snapshot) {
    auto it = params_.find(name);
    DSIN_REQUIRE(it != params_.end(),
                 "ParamStore::Load: unexpected param " + name);
    DSIN_REQUIRE(it->second->value.SameShape(t),
                 "ParamStore::Load: shape mismatch for " + name);
    it->second->value = t;
  }
}

void Adam::Step(ParamStore& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (const std::string& name : params.Names()) {
    Var p = params.Get(name);
    p->EnsureGrad();
    auto& mom = state_[name];
    if (mom.m.empty()) {
      mom.m.assign(p->value.size(), 0.0);
      mom.v.assign(p->value.size(), 0.0);
    }
    for (int64_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad.v[i];
      mom.m[i] = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * g;
      mom.v[i] = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = mom.m[i] / bc1;
      const double vhat = mom.v[i] / bc2;
      p->value.v[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace ad
}  // namespace dsin
