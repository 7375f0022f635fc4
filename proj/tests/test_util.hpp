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

#include <random>
#include <vector>

#include "cdst/layer_mask.hpp"
#include "cdst/model.hpp"
#include "cdst/tensor.hpp"

namespace cdst::testing {

inline nn::ModelSpec mlp(std::vector<std::size_t> widths, std::size_t tasks, std::size_t classes, bool relu = true) {
  nn::ModelSpec spec;
  spec.input_shape = {widths.front()};
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    spec.layers.emplace_back(nn::Affine{widths[i], widths[i + 1]});
    if (relu) spec.layers.emplace_back(nn::Relu{});
  }
  spec.n_tasks = tasks;
  spec.classes_per_task = classes;
  return spec;
}

inline nn::ModelSpec small_convnet(std::size_t tasks = 1, std::size_t classes = 3) {
  nn::ModelSpec spec;
  spec.input_shape = {2, 6, 6};
  spec.layers = {nn::Conv2d{2, 3, 3, 3, 1, 1}, nn::Relu{}, nn::Conv2d{3, 4, 3, 3, 2, 0}, nn::Relu{}, nn::Flatten{},
                 nn::Affine{16, 8}, nn::Relu{}};
  spec.n_tasks = tasks;
  spec.classes_per_task = classes;
  return spec;
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> d(0.0, scale);
  for (double& v : t.values()) v = d(rng);
  return t;
}

inline std::vector<int> random_labels(std::size_t n, std::size_t classes, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, int(classes) - 1);
  std::vector<int> out(n);
  for (int& y : out) y = d(rng);
  return out;
}

inline LayerMask random_mask(std::size_t id, std::size_t size, double density, std::mt19937_64& rng) {
  LayerMask m(id, size);
  std::bernoulli_distribution b(density);
  for (std::size_t p = 0; p < size; ++p) {
    if (b(rng)) m.set(p);
  }
  return m;
}

inline std::vector<LayerMask> full_masks(const nn::ParamSet& params) {
  std::vector<LayerMask> out;
  for (std::size_t l = 0; l < params.sparse_count(); ++l) out.push_back(LayerMask::full(l, params.weight(l).value.size()));
  return out;
}

}  // namespace cdst::testing
