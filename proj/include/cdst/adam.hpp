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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdst/errors.hpp"
#include "cdst/layer_mask.hpp"
#include "cdst/model.hpp"

namespace cdst::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Step decay: base * factor^(milestones passed). Milestones are fractions of
/// the total epoch count.
struct LrSchedule {
  double base = 1e-3;
  std::vector<double> milestones{0.5, 0.75};
  double factor = 0.1;

  double at(std::size_t epoch, std::size_t total_epochs) const {
    double lr = base;
    for (double m : milestones) {
      if (double(epoch) >= m * double(total_epochs)) lr *= factor;
    }
    return lr;
  }
};

/// Adam moments for every ParamSet tensor.
struct OptimState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;
  AdamConfig adam;
  LrSchedule schedule;

  OptimState() = default;
  OptimState(const ParamSet& params, AdamConfig cfg = {}, LrSchedule sched = {})
      : step(0), adam(cfg), schedule(std::move(sched)) {
    for (const auto& p : params) {
      first_moment.emplace_back(p.value.shape());
      second_moment.emplace_back(p.value.shape());
    }
  }

  void reset_position(std::size_t param_index, std::size_t pos) {
    first_moment.at(param_index)[pos] = 0.0;
    second_moment.at(param_index)[pos] = 0.0;
  }
};

/// One Adam step touching only positions set in `trainable` (one mask per
/// ParamSet tensor). Everything else, values and moments, is left untouched.
inline void adam_step_masked(ParamSet& params, std::span<const Tensor> grads, std::span<const LayerMask> trainable,
                             OptimState& opt, double lr) {
  if (grads.size() != params.size() || trainable.size() != params.size() ||
      opt.first_moment.size() != params.size()) {
    throw DimensionError("adam: expected " + std::to_string(params.size()) + " tensors, got grads=" +
                         std::to_string(grads.size()) + " masks=" + std::to_string(trainable.size()) +
                         " moments=" + std::to_string(opt.first_moment.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::size_t n = params[i].value.size();
    if (grads[i].size() != n || trainable[i].size() != n || opt.first_moment[i].size() != n) {
      throw DimensionError("adam: shape mismatch on parameter tensor " + std::to_string(i) + " (layer " +
                           std::to_string(params[i].layer_id) + ")");
    }
  }
  ++opt.step;
  const auto& a = opt.adam;
  const double bc1 = 1.0 - std::pow(a.beta1, double(opt.step));
  const double bc2 = 1.0 - std::pow(a.beta2, double(opt.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const LayerMask& mask = trainable[i];
    if (mask.active_count() == 0) continue;
    Tensor& w = params[i].value;
    Tensor& m = opt.first_moment[i];
    Tensor& v = opt.second_moment[i];
    const Tensor& g = grads[i];
    for (std::size_t p = 0; p < w.size(); ++p) {
      if (!mask.test(p)) continue;
      m[p] = a.beta1 * m[p] + (1.0 - a.beta1) * g[p];
      v[p] = a.beta2 * v[p] + (1.0 - a.beta2) * g[p] * g[p];
      w[p] -= lr * (m[p] / bc1) / (std::sqrt(v[p] / bc2) + a.epsilon);
    }
  }
}

}  // namespace cdst::nn
