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
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cdst/autodiff.hpp"

namespace cdst::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  /// Batch rows whose smallest |ReLU pre-activation| is at or below this are
  /// excluded so that central differences never straddle a kink.
  double kink_margin = 1e-3;
};

/// Max over sampled positions of |analytic - central difference| / max(1, |analytic|),
/// using a full mask context. Positions are drawn from the backbone and the
/// head of `head`.
inline double grad_check(const ModelSpec& spec, ParamSet params, const Tensor& batch, std::span<const int> labels,
                         std::size_t head, const GradCheckOptions& opt = {}) {
  std::vector<LayerMask> full;
  for (std::size_t l = 0; l < params.sparse_count(); ++l) {
    full.push_back(LayerMask::full(l, params.weight(l).value.size()));
  }

  // Keep only rows away from ReLU kinks.
  const std::size_t n = batch.dim(0);
  const std::size_t per = batch.size() / n;
  std::vector<std::size_t> keep;
  {
    auto probe = forward(spec, params, full, batch, head);
    const auto margins = probe.tape.min_abs_preactivation();
    for (std::size_t s = 0; s < n; ++s) {
      if (margins[s] > opt.kink_margin) keep.push_back(s);
    }
  }
  if (keep.empty()) throw InputError("grad_check: every batch row sits on a ReLU kink");
  Shape shape = batch.shape();
  shape[0] = keep.size();
  Tensor sub(shape);
  std::vector<int> sub_labels;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    std::copy_n(batch.data() + keep[r] * per, per, sub.data() + r * per);
    sub_labels.push_back(labels[keep[r]]);
  }

  const auto loss_at = [&](const ParamSet& ps) {
    auto fr = forward(spec, ps, full, sub, head);
    return softmax_cross_entropy(fr.logits, sub_labels).value;
  };

  auto fr = forward(spec, params, full, sub, head);
  const auto grads = backward(fr.tape, softmax_cross_entropy(fr.logits, sub_labels));

  std::vector<std::size_t> candidates;
  for (std::size_t l = 0; l < params.sparse_count(); ++l) candidates.push_back(params.weight_index(l));
  candidates.push_back(params.head_weight_index(head));
  candidates.push_back(params.head_bias_index(head));
  std::size_t total = 0;
  for (auto i : candidates) total += params[i].value.size();

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < opt.samples; ++k) {
    std::size_t flat = pick(rng);
    std::size_t t = 0;
    while (flat >= params[candidates[t]].value.size()) flat -= params[candidates[t++]].value.size();
    const std::size_t ti = candidates[t];
    double& w = params[ti].value[flat];
    const double saved = w;
    w = saved + opt.epsilon;
    const double up = loss_at(params);
    w = saved - opt.epsilon;
    const double down = loss_at(params);
    w = saved;
    const double numeric = (up - down) / (2.0 * opt.epsilon);
    const double analytic = grads[ti][flat];
    worst = std::max(worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)));
  }
  return worst;
}

}  // namespace cdst::nn
