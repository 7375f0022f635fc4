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
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cdst/adam.hpp"
#include "cdst/errors.hpp"
#include "cdst/layer_mask.hpp"
#include "cdst/model.hpp"
#include "cdst/sparse_mask.hpp"

namespace cdst::dst {

enum class Growth { random, unfired, gradient, momentum };

inline const char* to_string(Growth g) {
  switch (g) {
    case Growth::random: return "random";
    case Growth::unfired: return "unfired";
    case Growth::gradient: return "gradient";
    case Growth::momentum: return "momentum";
  }
  return "?";
}

inline Growth parse_growth(const std::string& s) {
  if (s == "random") return Growth::random;
  if (s == "unfired") return Growth::unfired;
  if (s == "gradient") return Growth::gradient;
  if (s == "momentum") return Growth::momentum;
  throw ConfigError("unknown growth strategy '" + s + "' (expected random|unfired|gradient|momentum)");
}

/// Topology update cadence for one task.
struct UpdateSchedule {
  std::size_t delta_t = 100;
  std::size_t t_end = 0;
  double alpha = 0.5;

  void validate(std::size_t total_iterations) const {
    if (delta_t < 1) throw ConfigError("delta_T must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1], got " + std::to_string(alpha));
    if (t_end > total_iterations) {
      throw ConfigError("T_end " + std::to_string(t_end) + " exceeds the task's " + std::to_string(total_iterations) +
                        " iterations");
    }
  }

  bool fires_at(std::size_t t) const { return t > 0 && t % delta_t == 0 && t <= t_end; }
};

/// Cosine-annealed update fraction; zero once t passes t_end.
inline double f_decay(std::size_t t, double alpha, std::size_t t_end) {
  if (t > t_end || t_end == 0) return 0.0;
  if (t == t_end) return 0.0;
  return alpha / 2.0 * (1.0 + std::cos(double(t) * std::numbers::pi / double(t_end)));
}

struct Selection {
  std::vector<std::size_t> positions;  // ascending
  std::size_t requested = 0;
  bool shortfall() const noexcept { return positions.size() < requested; }
};

namespace detail {

/// Indices of the k candidates ranking first under `before`, sorted ascending.
template <class Before>
std::vector<std::size_t> top_k(std::vector<std::size_t> cand, std::size_t k, Before before) {
  k = std::min(k, cand.size());
  if (k < cand.size()) {
    std::nth_element(cand.begin(), cand.begin() + std::ptrdiff_t(k), cand.end(), before);
  }
  cand.resize(k);
  std::sort(cand.begin(), cand.end());
  return cand;
}

template <class Rng>
std::vector<std::size_t> sample(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline std::vector<std::size_t> by_magnitude_desc(std::span<const double> score, std::vector<std::size_t> cand,
                                                  std::size_t k) {
  return top_k(std::move(cand), k, [&](std::size_t a, std::size_t b) {
    const double x = std::abs(score[a]), y = std::abs(score[b]);
    return x > y || (x == y && a < b);
  });
}

}  // namespace detail

/// Removes the k active trainable positions with the smallest |weight| (ties
/// to the lowest index), zeroes them and clears them from `trainable`.
/// `requested` keeps the original k so a clamp is visible to the caller.
inline Selection drop_magnitude(std::span<double> weights, LayerMask& trainable, std::size_t k) {
  Selection out;
  out.requested = k;
  out.positions = detail::top_k(trainable.positions(), k, [&](std::size_t a, std::size_t b) {
    const double x = std::abs(weights[a]), y = std::abs(weights[b]);
    return x < y || (x == y && a < b);
  });
  for (auto p : out.positions) {
    weights[p] = 0.0;
    trainable.reset(p);
  }
  return out;
}

template <class Rng>
Selection grow_random(const std::vector<std::size_t>& candidates, std::size_t k, Rng& rng) {
  return {detail::sample(candidates, k, rng), k};
}

/// Prefers candidates never active in `fired`; tops up at random from the
/// rest. Grown positions are recorded in `fired`.
template <class Rng>
Selection grow_unfired(const std::vector<std::size_t>& candidates, LayerMask& fired, std::size_t k, Rng& rng) {
  std::vector<std::size_t> fresh, seen;
  for (auto p : candidates) (fired.test(p) ? seen : fresh).push_back(p);
  Selection out{detail::sample(std::move(fresh), k, rng), k};
  if (out.positions.size() < k) {
    auto extra = detail::sample(std::move(seen), k - out.positions.size(), rng);
    out.positions.insert(out.positions.end(), extra.begin(), extra.end());
    std::sort(out.positions.begin(), out.positions.end());
  }
  for (auto p : out.positions) fired.set(p);
  return out;
}

inline Selection grow_gradient(std::span<const double> dense_grads, const std::vector<std::size_t>& candidates,
                               std::size_t k) {
  return {detail::by_magnitude_desc(dense_grads, candidates, k), k};
}

inline Selection grow_momentum(std::span<const double> momentum_ema, const std::vector<std::size_t>& candidates,
                               std::size_t k) {
  return {detail::by_magnitude_desc(momentum_ema, candidates, k), k};
}

/// ema <- beta * ema + (1 - beta) * grad
inline void update_momentum(std::span<double> ema, std::span<const double> grad, double beta) {
  for (std::size_t i = 0; i < ema.size(); ++i) ema[i] = beta * ema[i] + (1.0 - beta) * grad[i];
}

/// Per-task exploration memory.
struct GrowthState {
  Growth strategy = Growth::random;
  std::vector<LayerMask> fired;  // positions ever active
  std::vector<Tensor> momentum;  // dense EMA of gradients per sparse layer
  double beta = 0.9;

  GrowthState() = default;
  GrowthState(Growth g, const sparse::MaskSet& initial, const nn::ParamSet& params, double ema_beta)
      : strategy(g), beta(ema_beta) {
    for (const auto& m : initial.layers) fired.push_back(m);
    for (std::size_t l = 0; l < params.sparse_count(); ++l) momentum.emplace_back(params.weight(l).value.shape());
  }
};

struct LayerChange {
  std::vector<std::size_t> dropped;
  std::vector<std::size_t> grown;
  std::size_t requested = 0;    // round(fraction * active) before any clamp
  std::size_t candidates = 0;   // unassigned inactive positions available for growth
  bool capacity = false;        // growth returned fewer positions than were dropped
  bool pool_limited = false;    // drop count clamped to the candidate pool
};

struct TopologyEvent {
  std::size_t task = 0;
  std::size_t iteration = 0;
  double fraction = 0.0;
  Growth strategy = Growth::random;
  std::vector<LayerChange> layers;
};

/// One drop-and-grow round over every sparse layer. Drops run first and the
/// growth pool excludes the positions just dropped, so each layer swaps
/// exactly as many connections as it drops. The swap count is clamped to the
/// pool of unassigned inactive positions.
template <class Rng>
TopologyEvent topology_update(nn::ParamSet& params, sparse::MaskSet& mask, const sparse::FrozenRegistry& registry,
                              nn::OptimState& opt, std::span<const Tensor> dense_grads, GrowthState& growth,
                              std::size_t t, const UpdateSchedule& schedule, Rng& rng) {
  TopologyEvent ev;
  ev.task = mask.task_id;
  ev.iteration = t;
  ev.strategy = growth.strategy;
  ev.fraction = f_decay(t, schedule.alpha, schedule.t_end);
  const std::size_t L = mask.layers.size();
  if (growth.strategy == Growth::momentum) {
    for (std::size_t l = 0; l < L; ++l) {
      update_momentum(growth.momentum[l].values(), dense_grads[params.weight_index(l)].values(), growth.beta);
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    LayerChange ch;
    LayerMask& trainable = mask.layers[l];
    ch.requested = sparse::round_count(ev.fraction * double(trainable.active_count()));
    if (ch.requested == 0) {
      ev.layers.push_back(std::move(ch));
      continue;
    }
    std::vector<std::size_t> pool;
    for (std::size_t p = 0; p < trainable.size(); ++p) {
      if (!trainable.test(p) && !registry.is_owned(l, p)) pool.push_back(p);
    }
    ch.candidates = pool.size();
    const std::size_t k = std::min(ch.requested, pool.size());
    ch.pool_limited = k < ch.requested;

    const std::size_t wi = params.weight_index(l);
    auto weights = params[wi].value.values();
    ch.dropped = drop_magnitude(weights, trainable, k).positions;

    Selection grown;
    switch (growth.strategy) {
      case Growth::random: grown = grow_random(pool, k, rng); break;
      case Growth::unfired: grown = grow_unfired(pool, growth.fired[l], k, rng); break;
      case Growth::gradient: grown = grow_gradient(dense_grads[wi].values(), pool, k); break;
      case Growth::momentum: grown = grow_momentum(growth.momentum[l].values(), pool, k); break;
    }
    ch.grown = std::move(grown.positions);
    ch.capacity = ch.grown.size() < ch.dropped.size();
    for (auto p : ch.grown) {
      weights[p] = 0.0;
      trainable.set(p);
      growth.fired[l].set(p);
    }
    for (auto p : ch.dropped) opt.reset_position(wi, p);
    for (auto p : ch.grown) opt.reset_position(wi, p);
    ev.layers.push_back(std::move(ch));
  }
  return ev;
}

/// Ordered (task range -> strategy) table. Task numbers are 1-based and
/// ranges inclusive.
class GrowthPolicy {
 public:
  struct Range {
    std::size_t first = 1;
    std::size_t last = std::numeric_limits<std::size_t>::max();
    Growth strategy = Growth::random;
  };

  GrowthPolicy() = default;
  explicit GrowthPolicy(std::vector<Range> ranges) : ranges_(std::move(ranges)) {}

  static GrowthPolicy constant(Growth g) { return GrowthPolicy({{1, std::numeric_limits<std::size_t>::max(), g}}); }

  /// Random growth for tasks 1-5, gradient growth for tasks 6-10.
  static GrowthPolicy default_adaptive() {
    return GrowthPolicy({{1, 5, Growth::random}, {6, 10, Growth::gradient}});
  }

  /// Parses "1-5:random,6-10:gradient"; "6-:gradient" leaves the range open.
  static GrowthPolicy parse(const std::string& text) {
    std::vector<Range> ranges;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      const auto dash = item.find('-');
      if (colon == std::string::npos || dash == std::string::npos || dash > colon) {
        throw ConfigError("bad growth policy entry '" + item + "' (expected first-last:strategy)");
      }
      Range r;
      try {
        r.first = std::stoul(item.substr(0, dash));
        const std::string last = item.substr(dash + 1, colon - dash - 1);
        if (!last.empty()) r.last = std::stoul(last);
      } catch (const std::exception&) {
        throw ConfigError("bad task range in growth policy entry '" + item + "'");
      }
      if (r.first == 0 || r.last < r.first) throw ConfigError("empty or zero-based range in policy entry '" + item + "'");
      r.strategy = parse_growth(item.substr(colon + 1));
      ranges.push_back(r);
    }
    if (ranges.empty()) throw ConfigError("growth policy is empty");
    return GrowthPolicy(std::move(ranges));
  }

  /// Strategy for 1-based task number `task`; first matching range wins.
  Growth for_task(std::size_t task) const {
    for (const auto& r : ranges_) {
      if (task >= r.first && task <= r.last) return r.strategy;
    }
    throw ConfigError("growth policy does not cover task " + std::to_string(task));
  }

  void validate(std::size_t n_tasks) const {
    for (std::size_t t = 1; t <= n_tasks; ++t) (void)for_task(t);
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
      if (i) os << ',';
      os << ranges_[i].first << '-';
      if (ranges_[i].last != std::numeric_limits<std::size_t>::max()) os << ranges_[i].last;
      os << ':' << to_string(ranges_[i].strategy);
    }
    return os.str();
  }

  const std::vector<Range>& ranges() const noexcept { return ranges_; }

 private:
  std::vector<Range> ranges_;
};

inline Growth adaptive_policy(std::size_t task, const GrowthPolicy& policy) { return policy.for_task(task); }

}  // namespace cdst::dst
