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

// Reverse-mode automatic differentiation over Tensor, sized for the small
// convolutional models in this project. Every op builds a graph node holding
// the forward value and a closure that scatters the node's gradient into its
// parents; Backward() replays the closures in reverse creation order.

#ifndef DSIN_AUTODIFF_H_
#define DSIN_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dsin/tensor.h"

namespace dsin {
namespace ad {

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward;
  int64_t id = 0;
  bool requires_grad = false;

  void EnsureGrad() {
    if (grad.v.empty()) grad = Tensor(value.shape);
  }
};

using Var = std::shared_ptr<Node>;

Var MakeVar(Tensor value, bool requires_grad = false);
Var Constant(Tensor value);

// While a guard is alive, ops compute values only; no closures or parent
// links are recorded, so gradients cannot flow through that region.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};
bool GradEnabled();

// Seeds d(root)/d(root) = 1 (root must be scalar) and accumulates gradients
// into every reachable node, including constants; callers read only the
// grads they care about.
void Backward(const Var& root);

// ----- ops on {c,h,w} feature maps -----

// x {cin,h,w}, w {cout,cin,kh,kw}, optional b {cout}. Zero padding.
Var Conv2d(const Var& x, const Var& w, const Var& b, int stride, int dilation,
           int pad);
Var UpsampleNearest2(const Var& x);
Var LeakyRelu(const Var& x, double alpha);
Var Add(const Var& a, const Var& b);
Var ConcatC(const Var& a, const Var& b);
// Keeps the top-left oh x ow window.
Var Crop(const Var& x, int oh, int ow);
Var Scale(const Var& x, double s);

// Nearest-center quantization with a straight-through gradient: the value
// snaps to the closest center (ties to the lower index) while the backward
// pass treats the op as identity in x. Centers receive no gradient here.
// If symbols is non-null it receives the chosen center index per element.
Var QuantizeSte(const Var& x, const std::vector<double>& centers,
                std::vector<int>* symbols);

// Differentiable total-bit estimate of coding z against a per-channel
// categorical model. Soft assignment weights q_k = softmax(-(z-c_k)^2/tau)
// replace the hard quantizer so z, the centers and the logits all receive
// gradients; the hard cross-entropy rate is recovered as tau -> 0.
// z {c,h,w}, centers {L}, logits {c,L}. Probabilities are floored at
// prob_floor before taking logs. Returns a scalar (total bits).
Var SoftRateBits(const Var& z, const Var& centers, const Var& logits,
                 double tau, double prob_floor);

// ----- scalar-producing ops -----

Var L1Loss(const Var& a, const Var& b);       // mean |a-b|
Var AddScalar(const Var& a, const Var& b);    // both {1}
Var HingeAbove(const Var& x, double threshold);  // max(0, x - threshold)
Var Inner(const Var& x, const Tensor& t);     // sum(x * t)

// ----- parameters and optimization -----

// Named trainable tensors with deterministic insertion order.
class ParamStore {
 public:
  Var Create(const std::string& name, Tensor init);
  Var Get(const std::string& name) const;
  bool Has(const std::string& name) const;
  const std::vector<std::string>& Names() const { return names_; }
  void ZeroGrad();
  int64_t TotalCount() const;

  std::map<std::string, Tensor> Snapshot() const;
  // Overwrites values of already-created params; names must match exactly.
  void Load(const std::map<std::string, Tensor>& snapshot);

 private:
  std::vector<std::string> names_;
  std::map<std::string, Var> params_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}
  void Step(ParamStore& params);
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace ad
}  // namespace dsin

#endif  // DSIN_AUTODIFF_H_
