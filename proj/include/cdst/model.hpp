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

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cdst/errors.hpp"
#include "cdst/tensor.hpp"

namespace cdst::nn {

/// Fully connected layer without bias; weights stored as (n_out, n_in).
struct Affine {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
};

/// 2-D convolution with zero padding; kernel stored as (c_out, c_in, h, w).
struct Conv2d {
  std::size_t c_in = 0;
  std::size_t c_out = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct Relu {};
struct Flatten {};

using Layer = std::variant<Affine, Conv2d, Relu, Flatten>;

inline bool is_sparse(const Layer& layer) {
  return std::holds_alternative<Affine>(layer) || std::holds_alternative<Conv2d>(layer);
}

inline std::string layer_name(const Layer& layer, std::size_t index) {
  const char* kind = std::visit(
      [](const auto& l) -> const char* {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Affine>) return "affine";
        else if constexpr (std::is_same_v<T, Conv2d>) return "conv2d";
        else if constexpr (std::is_same_v<T, Relu>) return "relu";
        else return "flatten";
      },
      layer);
  return std::string(kind) + "#" + std::to_string(index);
}

/// Shape of the weight tensor of a sparse layer.
inline Shape weight_shape(const Layer& layer) {
  if (const auto* a = std::get_if<Affine>(&layer)) return {a->n_out, a->n_in};
  if (const auto* c = std::get_if<Conv2d>(&layer)) return {c->c_out, c->c_in, c->kernel_h, c->kernel_w};
  return {};
}

inline std::size_t fan_in(const Layer& layer) {
  if (const auto* a = std::get_if<Affine>(&layer)) return a->n_in;
  if (const auto* c = std::get_if<Conv2d>(&layer)) return c->c_in * c->kernel_h * c->kernel_w;
  return 0;
}

/// Backbone layer stack plus one dense head per task.
struct ModelSpec {
  Shape input_shape;  // per sample, without the batch extent
  std::vector<Layer> layers;
  std::size_t n_tasks = 1;
  std::size_t classes_per_task = 2;

  /// Per-sample activation shape after each layer; element 0 is the input.
  /// Throws DimensionError naming the first layer whose input does not fit.
  std::vector<Shape> activation_shapes() const {
    if (input_shape.empty()) throw DimensionError("model input shape is empty");
    std::vector<Shape> shapes{input_shape};
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Shape& in = shapes.back();
      const auto fail = [&](const std::string& why) {
        throw DimensionError("layer " + layer_name(layers[i], i) + ": " + why + " (input " +
                             shape_str(in) + ")");
      };
      Shape out;
      if (const auto* a = std::get_if<Affine>(&layers[i])) {
        if (a->n_in == 0 || a->n_out == 0) fail("zero extent");
        if (in.size() != 1 || in[0] != a->n_in) fail("expects " + std::to_string(a->n_in) + " features");
        out = {a->n_out};
      } else if (const auto* c = std::get_if<Conv2d>(&layers[i])) {
        if (c->c_in == 0 || c->c_out == 0 || c->kernel_h == 0 || c->kernel_w == 0 || c->stride == 0) {
          fail("zero extent");
        }
        if (in.size() != 3 || in[0] != c->c_in) fail("expects " + std::to_string(c->c_in) + " channels");
        const std::size_t ph = in[1] + 2 * c->padding;
        const std::size_t pw = in[2] + 2 * c->padding;
        if (ph < c->kernel_h || pw < c->kernel_w) fail("kernel larger than padded input");
        out = {c->c_out, (ph - c->kernel_h) / c->stride + 1, (pw - c->kernel_w) / c->stride + 1};
      } else if (std::holds_alternative<Flatten>(layers[i])) {
        out = {shape_size(in)};
      } else {
        out = in;
      }
      shapes.push_back(std::move(out));
    }
    if (shapes.back().size() != 1) {
      throw DimensionError("backbone output must be a feature vector, got " + shape_str(shapes.back()));
    }
    return shapes;
  }

  std::size_t feature_dim() const { return activation_shapes().back()[0]; }

  /// Indices into `layers` of the affine/conv layers, in order.
  std::vector<std::size_t> sparse_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (is_sparse(layers[i])) out.push_back(i);
    }
    return out;
  }

  std::size_t sparse_param_count(std::size_t sparse_index) const {
    return shape_size(weight_shape(layers.at(sparse_layers().at(sparse_index))));
  }

  void validate() const {
    (void)activation_shapes();
    if (n_tasks == 0) throw DimensionError("model must declare at least one task head");
    if (classes_per_task == 0) throw DimensionError("classes_per_task must be positive");
  }
};

enum class ParamKind { affine_weight, affine_bias, conv_kernel, head_weight, head_bias };

struct ParamTensor {
  Tensor value;
  Tensor grad;
  std::size_t layer_id = 0;  // layer index for backbone tensors, task index for heads
  ParamKind kind = ParamKind::affine_weight;
};

/// All trainable tensors of a model. Sparse backbone weights come first in
/// layer order, then (weight, bias) per task head.
class ParamSet {
 public:
  ParamSet() = default;

  explicit ParamSet(const ModelSpec& spec) : n_sparse_(spec.sparse_layers().size()) {
    spec.validate();
    for (std::size_t idx : spec.sparse_layers()) {
      const Layer& layer = spec.layers[idx];
      const Shape ws = weight_shape(layer);
      tensors_.push_back({Tensor(ws), Tensor(ws), idx,
                          std::holds_alternative<Conv2d>(layer) ? ParamKind::conv_kernel
                                                                : ParamKind::affine_weight});
    }
    const std::size_t feat = spec.feature_dim();
    for (std::size_t t = 0; t < spec.n_tasks; ++t) {
      const Shape hw{spec.classes_per_task, feat};
      const Shape hb{spec.classes_per_task};
      tensors_.push_back({Tensor(hw), Tensor(hw), t, ParamKind::head_weight});
      tensors_.push_back({Tensor(hb), Tensor(hb), t, ParamKind::head_bias});
    }
  }

  std::size_t size() const noexcept { return tensors_.size(); }
  std::size_t sparse_count() const noexcept { return n_sparse_; }
  std::size_t head_count() const noexcept { return (tensors_.size() - n_sparse_) / 2; }

  ParamTensor& operator[](std::size_t i) { return tensors_.at(i); }
  const ParamTensor& operator[](std::size_t i) const { return tensors_.at(i); }

  std::size_t weight_index(std::size_t sparse_layer) const noexcept { return sparse_layer; }
  std::size_t head_weight_index(std::size_t task) const noexcept { return n_sparse_ + 2 * task; }
  std::size_t head_bias_index(std::size_t task) const noexcept { return n_sparse_ + 2 * task + 1; }

  ParamTensor& weight(std::size_t l) { return tensors_.at(weight_index(l)); }
  const ParamTensor& weight(std::size_t l) const { return tensors_.at(weight_index(l)); }
  ParamTensor& head_weight(std::size_t t) { return tensors_.at(head_weight_index(t)); }
  const ParamTensor& head_weight(std::size_t t) const { return tensors_.at(head_weight_index(t)); }
  ParamTensor& head_bias(std::size_t t) { return tensors_.at(head_bias_index(t)); }
  const ParamTensor& head_bias(std::size_t t) const { return tensors_.at(head_bias_index(t)); }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  void zero_grads() {
    for (auto& p : tensors_) p.grad.fill(0.0);
  }

 private:
  std::vector<ParamTensor> tensors_;
  std::size_t n_sparse_ = 0;
};

/// He-normal backbone weights, scaled-normal head weights, zero head biases.
template <class Rng>
ParamSet init_params(const ModelSpec& spec, Rng& rng) {
  ParamSet params(spec);
  const auto sparse = spec.sparse_layers();
  for (std::size_t l = 0; l < sparse.size(); ++l) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(fan_in(spec.layers[sparse[l]]))));
    for (double& w : params.weight(l).value.values()) w = dist(rng);
  }
  const double head_std = std::sqrt(1.0 / double(spec.feature_dim()));
  for (std::size_t t = 0; t < params.head_count(); ++t) {
    std::normal_distribution<double> dist(0.0, head_std);
    for (double& w : params.head_weight(t).value.values()) w = dist(rng);
  }
  return params;
}

}  // namespace cdst::nn
