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
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "cdst/errors.hpp"
#include "cdst/layer_mask.hpp"
#include "cdst/model.hpp"

namespace cdst::sparse {

enum class InitStrategy { uniform, erk };

inline const char* to_string(InitStrategy s) { return s == InitStrategy::uniform ? "uniform" : "erk"; }

inline InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "uniform") return InitStrategy::uniform;
  if (s == "erk") return InitStrategy::erk;
  throw ConfigError("unknown init strategy '" + s + "' (expected uniform|erk)");
}

/// round-half-up
inline std::size_t round_count(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

/// Per-layer target densities for the sparse backbone layers.
struct SparsityPlan {
  std::vector<double> density;
  std::vector<std::size_t> layer_size;
  double sparsity = 0.0;
  InitStrategy strategy = InitStrategy::uniform;

  std::size_t layer_count() const noexcept { return density.size(); }

  /// Active weights per task in layer l; never below one.
  std::size_t budget(std::size_t l) const {
    return std::max<std::size_t>(1, round_count(density.at(l) * double(layer_size.at(l))));
  }

  std::size_t total_budget() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) n += budget(l);
    return n;
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (auto s : layer_size) n += s;
    return n;
  }
};

namespace detail {

inline void check_sparsity(double s) {
  if (!(s >= 0.0) || !(s < 1.0)) {
    throw ConfigError("sparsity must lie in [0, 1), got " + std::to_string(s));
  }
}

inline std::vector<std::size_t> layer_sizes(const nn::ModelSpec& model) {
  std::vector<std::size_t> out;
  for (auto idx : model.sparse_layers()) out.push_back(shape_size(nn::weight_shape(model.layers[idx])));
  return out;
}

}  // namespace detail

/// Unscaled Erdős–Rényi(-Kernel) density of one layer.
inline double erk_raw_density(const nn::Layer& layer) {
  if (const auto* a = std::get_if<nn::Affine>(&layer)) {
    return double(a->n_in + a->n_out) / (double(a->n_in) * double(a->n_out));
  }
  if (const auto* c = std::get_if<nn::Conv2d>(&layer)) {
    return double(c->c_in + c->c_out + c->kernel_h + c->kernel_w) /
           (double(c->c_in) * double(c->c_out) * double(c->kernel_h) * double(c->kernel_w));
  }
  throw ConfigError("ERK density requested for a layer without weights");
}

inline SparsityPlan plan_uniform(double sparsity, const nn::ModelSpec& model) {
  detail::check_sparsity(sparsity);
  SparsityPlan plan;
  plan.sparsity = sparsity;
  plan.strategy = InitStrategy::uniform;
  plan.layer_size = detail::layer_sizes(model);
  plan.density.assign(plan.layer_size.size(), 1.0 - sparsity);
  return plan;
}

/// ERK allocation. The scale is solved so that the active total equals
/// (1-S) of all sparse weights; layers whose scaled density exceeds one are
/// pinned at one and the scale is re-solved over the rest until stable.
inline SparsityPlan plan_erk(double sparsity, const nn::ModelSpec& model) {
  detail::check_sparsity(sparsity);
  SparsityPlan plan;
  plan.sparsity = sparsity;
  plan.strategy = InitStrategy::erk;
  plan.layer_size = detail::layer_sizes(model);
  const auto sparse = model.sparse_layers();
  const std::size_t L = sparse.size();
  std::vector<double> raw(L);
  for (std::size_t l = 0; l < L; ++l) raw[l] = erk_raw_density(model.layers[sparse[l]]);

  const double target = (1.0 - sparsity) * double(plan.total_size());
  std::vector<bool> capped(L, false);
  double scale = 0.0;
  for (;;) {
    double fixed = 0.0, weighted = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      if (capped[l]) fixed += double(plan.layer_size[l]);
      else weighted += raw[l] * double(plan.layer_size[l]);
    }
    if (weighted == 0.0) break;
    scale = (target - fixed) / weighted;
    bool changed = false;
    for (std::size_t l = 0; l < L; ++l) {
      if (!capped[l] && scale * raw[l] > 1.0) {
        capped[l] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  plan.density.resize(L);
  for (std::size_t l = 0; l < L; ++l) plan.density[l] = capped[l] ? 1.0 : scale * raw[l];
  return plan;
}

inline SparsityPlan make_plan(InitStrategy s, double sparsity, const nn::ModelSpec& model) {
  return s == InitStrategy::uniform ? plan_uniform(sparsity, model) : plan_erk(sparsity, model);
}

/// One task's trainable positions, one LayerMask per sparse layer.
struct MaskSet {
  std::size_t task_id = 0;
  std::vector<LayerMask> layers;

  std::size_t active_total() const {
    std::size_t n = 0;
    for (const auto& m : layers) n += m.active_count();
    return n;
  }
};

/// Raised whenever a layer cannot supply the requested number of positions.
struct CapacityEvent {
  std::size_t task = 0;
  std::size_t layer = 0;
  std::size_t requested = 0;
  std::size_t granted = 0;
};

/// Owner task of every backbone position. Ownership is permanent.
class FrozenRegistry {
 public:
  static constexpr std::int32_t kUnowned = -1;

  FrozenRegistry() = default;
  explicit FrozenRegistry(const std::vector<std::size_t>& layer_sizes) {
    for (auto n : layer_sizes) {
      owner_.emplace_back(n, kUnowned);
      unassigned_.push_back(n);
    }
  }

  std::size_t layer_count() const noexcept { return owner_.size(); }
  std::size_t layer_size(std::size_t l) const { return owner_.at(l).size(); }
  std::size_t unassigned(std::size_t l) const { return unassigned_.at(l); }
  std::int32_t owner(std::size_t l, std::size_t pos) const { return owner_.at(l)[pos]; }
  bool is_owned(std::size_t l, std::size_t pos) const { return owner_.at(l)[pos] != kUnowned; }

  std::size_t total_unassigned() const {
    std::size_t n = 0;
    for (auto u : unassigned_) n += u;
    return n;
  }

  /// Positions owned by tasks with index <= `last_task`.
  LayerMask owned_mask(std::size_t l, std::size_t last_task = std::numeric_limits<std::size_t>::max()) const {
    LayerMask m(l, layer_size(l));
    const auto& o = owner_.at(l);
    for (std::size_t p = 0; p < o.size(); ++p) {
      if (o[p] != kUnowned && std::size_t(o[p]) <= last_task) m.set(p);
    }
    return m;
  }

  LayerMask task_mask(std::size_t l, std::size_t task) const {
    LayerMask m(l, layer_size(l));
    const auto& o = owner_.at(l);
    for (std::size_t p = 0; p < o.size(); ++p) {
      if (o[p] == std::int32_t(task)) m.set(p);
    }
    return m;
  }

  /// Hands every position of `mask` to `task`. Throws InvariantError, leaving
  /// the registry untouched, if any position already has an owner.
  void freeze(std::size_t task, const MaskSet& mask) {
    if (mask.layers.size() != owner_.size()) {
      throw InvariantError("freeze: mask covers " + std::to_string(mask.layers.size()) + " layers, registry has " +
                           std::to_string(owner_.size()));
    }
    for (std::size_t l = 0; l < owner_.size(); ++l) {
      const auto& m = mask.layers[l];
      if (m.size() != owner_[l].size()) throw InvariantError("freeze: mask size mismatch on layer " + std::to_string(l));
      for (std::size_t p = 0; p < m.size(); ++p) {
        if (m.test(p) && owner_[l][p] != kUnowned) {
          throw InvariantError("freeze: position " + std::to_string(p) + " of layer " + std::to_string(l) +
                               " already owned by task " + std::to_string(owner_[l][p]));
        }
      }
    }
    for (std::size_t l = 0; l < owner_.size(); ++l) {
      const auto& m = mask.layers[l];
      for (std::size_t p = 0; p < m.size(); ++p) {
        if (m.test(p)) owner_[l][p] = std::int32_t(task);
      }
      unassigned_[l] -= m.active_count();
    }
  }

  const std::vector<std::int32_t>& owners(std::size_t l) const { return owner_.at(l); }

  /// Rebuilds a registry from raw owner tables (checkpoint restore).
  static FrozenRegistry from_owners(std::vector<std::vector<std::int32_t>> owners) {
    FrozenRegistry r;
    for (auto& o : owners) {
      r.unassigned_.push_back(std::size_t(std::count(o.begin(), o.end(), kUnowned)));
      r.owner_.push_back(std::move(o));
    }
    return r;
  }

  friend bool operator==(const FrozenRegistry&, const FrozenRegistry&) = default;

 private:
  std::vector<std::vector<std::int32_t>> owner_;
  std::vector<std::size_t> unassigned_;
};

struct InitialMask {
  MaskSet mask;
  std::vector<CapacityEvent> capacity;
};

/// Draws min(budget, unassigned) positions per layer uniformly from the
/// unassigned pool.
template <class Rng>
InitialMask sample_initial_mask(const SparsityPlan& plan, const FrozenRegistry& registry, std::size_t task, Rng& rng) {
  if (plan.layer_count() != registry.layer_count()) {
    throw DimensionError("plan has " + std::to_string(plan.layer_count()) + " layers, registry has " +
                         std::to_string(registry.layer_count()));
  }
  InitialMask out;
  out.mask.task_id = task;
  for (std::size_t l = 0; l < plan.layer_count(); ++l) {
    std::vector<std::size_t> pool;
    pool.reserve(registry.unassigned(l));
    for (std::size_t p = 0; p < registry.layer_size(l); ++p) {
      if (!registry.is_owned(l, p)) pool.push_back(p);
    }
    const std::size_t want = plan.budget(l);
    const std::size_t take = std::min(want, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    LayerMask m(l, registry.layer_size(l));
    for (std::size_t i = 0; i < take; ++i) m.set(pool[i]);
    out.mask.layers.push_back(std::move(m));
    if (take < want) out.capacity.push_back({task, l, want, take});
  }
  return out;
}

/// Positions visible to the forward pass while training `current`: every
/// owned position plus the current trainable set.
inline std::vector<LayerMask> effective_forward_mask(const FrozenRegistry& registry, const MaskSet& current) {
  std::vector<LayerMask> out;
  for (std::size_t l = 0; l < registry.layer_count(); ++l) {
    LayerMask m = registry.owned_mask(l);
    m |= current.layers.at(l);
    out.push_back(std::move(m));
  }
  return out;
}

/// Forward mask of the subnetwork formed by tasks 0..last_task.
inline std::vector<LayerMask> context_mask(const FrozenRegistry& registry, std::size_t last_task) {
  std::vector<LayerMask> out;
  for (std::size_t l = 0; l < registry.layer_count(); ++l) out.push_back(registry.owned_mask(l, last_task));
  return out;
}

inline void freeze(FrozenRegistry& registry, std::size_t task, const MaskSet& final_mask) {
  registry.freeze(task, final_mask);
}

/// Ownership dump: one `layer_id,position,owner` row per owned position, owner 1-based.
inline void write_mask_csv(const FrozenRegistry& registry, std::ostream& os) {
  os << "layer_id,position,owner\n";
  for (std::size_t l = 0; l < registry.layer_count(); ++l) {
    const auto& o = registry.owners(l);
    for (std::size_t p = 0; p < o.size(); ++p) {
      if (o[p] != FrozenRegistry::kUnowned) os << l << ',' << p << ',' << (o[p] + 1) << '\n';
    }
  }
}

}  // namespace cdst::sparse
