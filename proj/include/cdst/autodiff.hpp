// Copyright 2026 The CDST Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cdst/errors.hpp"
#include "cdst/layer_mask.hpp"
#include "cdst/model.hpp"
#include "cdst/tensor.hpp"

namespace cdst::nn {

/// Activations recorded by forward(); consumed exactly once by backward().
struct Tape {
  const ModelSpec* spec = nullptr;
  std::vector<Tensor> layer_inputs;   // input of every backbone layer, batch-leading
  std::vector<Tensor> eff_weights;    // masked weights per sparse layer
  Tensor features;                    // head input
  Tensor head_weight;
  std::size_t head = 0;
  std::vector<Shape> param_shapes;    // shapes of every ParamSet tensor
  std::size_t n_sparse = 0;
  bool consumed = false;

  /// Smallest |pre-activation| entering any ReLU, per sample.
  std::vector<double> min_abs_preactivation() const {
    const std::size_t n = features.dim(0);
    std::vector<double> out(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < spec->layers.size(); ++i) {
      if (!std::holds_alternative<Relu>(spec->layers[i])) continue;
      const Tensor& z = layer_inputs[i];
      const std::size_t per = z.size() / n;
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t k = 0; k < per; ++k) out[s] = std::min(out[s], std::abs(z[s * per + k]));
      }
    }
    return out;
  }
};

struct ForwardResult {
  Tensor logits;
  Tape tape;
};

struct CrossEntropy {
  double value = 0.0;
  Tensor dlogits;  // gradient of the mean loss w.r.t. the logits
};

namespace detail {

inline Tensor affine_forward(const Tensor& x, const Tensor& w) {
  const std::size_t n = x.dim(0), in = w.dim(1), out = w.dim(0);
  Tensor y({n, out});
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x.data() + s * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = w.data() + o * in;
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xs[i];
      y[s * out + o] = acc;
    }
  }
  return y;
}

inline void affine_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw, Tensor& dx) {
  const std::size_t n = x.dim(0), in = w.dim(1), out = w.dim(0);
  dx = Tensor(x.shape());
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x.data() + s * in;
    double* dxs = dx.data() + s * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dy[s * out + o];
      if (g == 0.0) continue;
      double* dwo = dw.data() + o * in;
      const double* wo = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        dwo[i] += g * xs[i];
        dxs[i] += g * wo[i];
      }
    }
  }
}

inline Tensor conv_forward(const Tensor& x, const Tensor& w, const Conv2d& c) {
  const std::size_t n = x.dim(0), h = x.dim(2), wd = x.dim(3);
  const std::size_t oh = (h + 2 * c.padding - c.kernel_h) / c.stride + 1;
  const std::size_t ow = (wd + 2 * c.padding - c.kernel_w) / c.stride + 1;
  Tensor y({n, c.c_out, oh, ow});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t co = 0; co < c.c_out; ++co) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = 0.0;
          for (std::size_t ci = 0; ci < c.c_in; ++ci) {
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const std::ptrdiff_t iy = std::ptrdiff_t(oy * c.stride + ky) - std::ptrdiff_t(c.padding);
              if (iy < 0 || iy >= std::ptrdiff_t(h)) continue;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                const std::ptrdiff_t ix = std::ptrdiff_t(ox * c.stride + kx) - std::ptrdiff_t(c.padding);
                if (ix < 0 || ix >= std::ptrdiff_t(wd)) continue;
                acc += w[((co * c.c_in + ci) * c.kernel_h + ky) * c.kernel_w + kx] *
                       x[((s * c.c_in + ci) * h + std::size_t(iy)) * wd + std::size_t(ix)];
              }
            }
          }
          y[((s * c.c_out + co) * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }
  return y;
}

inline void conv_backward(const Tensor& x, const Tensor& w, const Conv2d& c, const Tensor& dy, Tensor& dw,
                          Tensor& dx) {
  const std::size_t n = x.dim(0), h = x.dim(2), wd = x.dim(3);
  const std::size_t oh = dy.dim(2), ow = dy.dim(3);
  dx = Tensor(x.shape());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t co = 0; co < c.c_out; ++co) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const double g = dy[((s * c.c_out + co) * oh + oy) * ow + ox];
          if (g == 0.0) continue;
          for (std::size_t ci = 0; ci < c.c_in; ++ci) {
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const std::ptrdiff_t iy = std::ptrdiff_t(oy * c.stride + ky) - std::ptrdiff_t(c.padding);
              if (iy < 0 || iy >= std::ptrdiff_t(h)) continue;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                const std::ptrdiff_t ix = std::ptrdiff_t(ox * c.stride + kx) - std::ptrdiff_t(c.padding);
                if (ix < 0 || ix >= std::ptrdiff_t(wd)) continue;
                const std::size_t wi = ((co * c.c_in + ci) * c.kernel_h + ky) * c.kernel_w + kx;
                const std::size_t xi = ((s * c.c_in + ci) * h + std::size_t(iy)) * wd + std::size_t(ix);
                dw[wi] += g * x[xi];
                dx[xi] += g * w[wi];
              }
            }
          }
        }
      }
    }
  }
}

inline Shape with_batch(std::size_t n, const Shape& per_sample) {
  Shape s{n};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

}  // namespace detail

/// Runs the backbone under `mask_context` (one mask per sparse layer) and the
/// dense head of task `head`. Weights outside the mask contribute nothing.
inline ForwardResult forward(const ModelSpec& spec, const ParamSet& params, std::span<const LayerMask> mask_context,
                             const Tensor& batch, std::size_t head) {
  const auto shapes = spec.activation_shapes();
  if (batch.rank() != spec.input_shape.size() + 1 ||
      !std::equal(spec.input_shape.begin(), spec.input_shape.end(), batch.shape().begin() + 1)) {
    throw DimensionError("layer input: batch shape " + shape_str(batch.shape()) + " does not match model input " +
                         shape_str(spec.input_shape));
  }
  if (mask_context.size() != params.sparse_count()) {
    throw DimensionError("mask context covers " + std::to_string(mask_context.size()) + " layers, model has " +
                         std::to_string(params.sparse_count()) + " sparse layers");
  }
  if (head >= params.head_count()) throw InputError("no head for task " + std::to_string(head));

  const std::size_t n = batch.dim(0);
  ForwardResult out;
  Tape& tape = out.tape;
  tape.spec = &spec;
  tape.head = head;
  tape.n_sparse = params.sparse_count();
  for (const auto& p : params) tape.param_shapes.push_back(p.value.shape());

  Tensor x = batch;
  std::size_t sparse_idx = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    tape.layer_inputs.push_back(x);
    const Layer& layer = spec.layers[i];
    if (is_sparse(layer)) {
      const Tensor& w = params.weight(sparse_idx).value;
      const LayerMask& m = mask_context[sparse_idx];
      if (m.size() != w.size()) {
        throw DimensionError("layer " + layer_name(layer, i) + ": mask has " + std::to_string(m.size()) +
                             " positions, weight has " + std::to_string(w.size()));
      }
      Tensor eff = w;
      for (std::size_t p = 0; p < eff.size(); ++p) {
        if (!m.test(p)) eff[p] = 0.0;
      }
      if (const auto* c = std::get_if<Conv2d>(&layer)) {
        x = detail::conv_forward(x, eff, *c);
      } else {
        x = detail::affine_forward(x, eff);
      }
      tape.eff_weights.push_back(std::move(eff));
      ++sparse_idx;
    } else if (std::holds_alternative<Relu>(layer)) {
      for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
    } else {
      x = x.reshaped(detail::with_batch(n, shapes[i + 1]));
    }
  }

  const Tensor& hw = params.head_weight(head).value;
  const Tensor& hb = params.head_bias(head).value;
  Tensor logits = detail::affine_forward(x, hw);
  const std::size_t classes = hb.size();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < classes; ++c) logits[s * classes + c] += hb[c];
  }
  tape.features = std::move(x);
  tape.head_weight = hw;
  out.logits = std::move(logits);
  return out;
}

/// Mean softmax cross-entropy over the batch, log-sum-exp stabilised.
inline CrossEntropy softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw DimensionError("logits must be (batch, classes), got " + shape_str(logits.shape()));
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (labels.size() != n) {
    throw DimensionError("label count " + std::to_string(labels.size()) + " != batch " + std::to_string(n));
  }
  CrossEntropy ce{0.0, Tensor(logits.shape())};
  for (std::size_t s = 0; s < n; ++s) {
    const int y = labels[s];
    if (y < 0 || std::size_t(y) >= c) {
      throw InputError("label " + std::to_string(y) + " out of range [0, " + std::to_string(c) + ")");
    }
    const double* row = logits.data() + s * c;
    const double mx = *std::max_element(row, row + c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(row[k] - mx);
    const double lse = mx + std::log(sum);
    ce.value += lse - row[y];
    for (std::size_t k = 0; k < c; ++k) {
      ce.dlogits[s * c + k] = (std::exp(row[k] - lse) - (k == std::size_t(y) ? 1.0 : 0.0)) / double(n);
    }
  }
  ce.value /= double(n);
  return ce;
}

/// Dense reverse pass. Returns one gradient per ParamSet tensor; sparse-layer
/// gradients are taken w.r.t. the effective (masked) weight, so inactive
/// positions receive the gradient they would have if switched on.
inline std::vector<Tensor> backward(Tape& tape, const CrossEntropy& loss) {
  if (tape.consumed) throw UsageError("tape already consumed by a previous backward pass");
  if (tape.spec == nullptr) throw UsageError("tape was not produced by forward");
  tape.consumed = true;

  std::vector<Tensor> grads;
  grads.reserve(tape.param_shapes.size());
  for (const auto& s : tape.param_shapes) grads.emplace_back(s);

  const ModelSpec& spec = *tape.spec;
  const std::size_t n = tape.features.dim(0);
  const std::size_t classes = loss.dlogits.dim(1);
  Tensor& dhw = grads[tape.n_sparse + 2 * tape.head];
  Tensor& dhb = grads[tape.n_sparse + 2 * tape.head + 1];
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < classes; ++c) dhb[c] += loss.dlogits[s * classes + c];
  }
  Tensor dx;
  detail::affine_backward(tape.features, tape.head_weight, loss.dlogits, dhw, dx);

  std::size_t sparse_idx = tape.n_sparse;
  for (std::size_t i = spec.layers.size(); i-- > 0;) {
    const Layer& layer = spec.layers[i];
    const Tensor& in = tape.layer_inputs[i];
    if (is_sparse(layer)) {
      --sparse_idx;
      Tensor dprev;
      if (const auto* c = std::get_if<Conv2d>(&layer)) {
        detail::conv_backward(in, tape.eff_weights[sparse_idx], *c, dx, grads[sparse_idx], dprev);
      } else {
        detail::affine_backward(in, tape.eff_weights[sparse_idx], dx, grads[sparse_idx], dprev);
      }
      dx = std::move(dprev);
    } else if (std::holds_alternative<Relu>(layer)) {
      for (std::size_t k = 0; k < dx.size(); ++k) {
        if (!(in[k] > 0.0)) dx[k] = 0.0;
      }
    } else {
      dx = dx.reshaped(in.shape());
    }
  }
  return grads;
}

}  // namespace cdst::nn
