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
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cdst/adam.hpp"
#include "cdst/autodiff.hpp"
#include "cdst/binary_io.hpp"
#include "cdst/data.hpp"
#include "cdst/dst.hpp"
#include "cdst/metrics.hpp"
#include "cdst/model.hpp"
#include "cdst/sparse_mask.hpp"

namespace cdst::continual {

enum class UnfiredScope { task, run };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  std::vector<double> lr_milestones{0.5, 0.75};
  double lr_factor = 0.1;
  nn::AdamConfig adam;

  double sparsity = 0.9;
  sparse::InitStrategy init = sparse::InitStrategy::uniform;
  dst::GrowthPolicy growth = dst::GrowthPolicy::constant(dst::Growth::random);
  std::size_t delta_t = 100;
  double alpha = 0.5;
  double t_end_fraction = 0.75;       // of the task's iterations, when t_end is unset
  std::optional<std::size_t> t_end;   // absolute override
  double momentum_beta = 0.9;
  UnfiredScope unfired_scope = UnfiredScope::task;

  std::uint64_t seed = 1;

  void validate(std::size_t n_tasks) const {
    if (epochs == 0) throw ConfigError("train.epochs must be positive");
    if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
    if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
    if (!(lr_factor > 0.0)) throw ConfigError("train.lr_factor must be positive");
    for (double m : lr_milestones) {
      if (!(m > 0.0 && m < 1.0)) throw ConfigError("train.lr_milestones entries must lie in (0, 1)");
    }
    if (!(sparsity >= 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must lie in [0, 1)");
    if (delta_t == 0) throw ConfigError("dst.delta_t must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("dst.alpha must lie in (0, 1]");
    if (!(t_end_fraction >= 0.0 && t_end_fraction <= 1.0)) throw ConfigError("dst.t_end_fraction must lie in [0, 1]");
    if (!(momentum_beta >= 0.0 && momentum_beta < 1.0)) throw ConfigError("dst.momentum_beta must lie in [0, 1)");
    growth.validate(n_tasks);
  }

  dst::UpdateSchedule schedule_for(std::size_t total_iterations) const {
    dst::UpdateSchedule s;
    s.delta_t = delta_t;
    s.alpha = alpha;
    s.t_end = t_end ? std::min(*t_end, total_iterations)
                    : sparse::round_count(t_end_fraction * double(total_iterations));
    s.validate(total_iterations);
    return s;
  }
};

struct EventLog {
  std::vector<dst::TopologyEvent> topology;
  std::vector<sparse::CapacityEvent> capacity;
  std::vector<std::size_t> saturated;  // tasks trained head-only
};

/// Everything that persists across task boundaries.
struct RunState {
  nn::ParamSet params;
  sparse::FrozenRegistry registry;
  std::vector<sparse::MaskSet> final_masks;
  metrics::AccuracyMatrix matrix;
  EventLog events;
  std::vector<std::uint8_t> head_trained;
  std::size_t next_task = 0;
  std::optional<std::size_t> saturation_task;  // first head-only task
  std::vector<LayerMask> fired_run;             // unfired history when scoped to the run
  std::mt19937_64 rng;
};

/// Passed to the topology observer before the update is applied.
struct TopologyProbe {
  const dst::TopologyEvent& event;
  std::span<const Tensor> grads;
  const sparse::MaskSet& mask_before;
  const sparse::FrozenRegistry& registry;
  const std::vector<Tensor>& weights_before;
};

class Engine {
 public:
  Engine(nn::ModelSpec model, TrainConfig cfg) : model_(std::move(model)), cfg_(std::move(cfg)) {
    model_.validate();
    cfg_.validate(model_.n_tasks);
  }

  const nn::ModelSpec& model() const noexcept { return model_; }
  const TrainConfig& config() const noexcept { return cfg_; }

  /// Observer invoked after every topology update with the pre-update state.
  std::function<void(const TopologyProbe&)> on_topology;

  RunState init_state() const {
    RunState s;
    s.rng.seed(cfg_.seed);
    s.params = nn::init_params(model_, s.rng);
    s.registry = sparse::FrozenRegistry(layer_sizes());
    s.matrix = metrics::AccuracyMatrix(model_.n_tasks);
    s.head_trained.assign(model_.n_tasks, 0);
    for (std::size_t l = 0; l < s.registry.layer_count(); ++l) s.fired_run.emplace_back(l, s.registry.layer_size(l));
    return s;
  }

  sparse::SparsityPlan plan() const { return sparse::make_plan(cfg_.init, cfg_.sparsity, model_); }

  /// Trains one task with dynamic sparse exploration over the unassigned
  /// positions and returns its final trainable mask. Owned weights and the
  /// heads of other tasks are left bit-identical.
  sparse::MaskSet train_task(RunState& state, const data::TaskSpec& task) const {
    const std::size_t t = task.task_id;
    if (t >= model_.n_tasks) throw InputError("task " + std::to_string(t + 1) + " has no head in the model");
    if (state.head_trained[t]) throw UsageError("task " + std::to_string(t + 1) + " was already trained");
    const data::Dataset& train = *task.train;
    train.validate();
    if (train.classes != model_.classes_per_task) {
      throw DimensionError("task " + std::to_string(t + 1) + " has " + std::to_string(train.classes) +
                           " classes, heads have " + std::to_string(model_.classes_per_task));
    }
    const std::uint64_t frozen_before = frozen_digest(state);

    auto init = sparse::sample_initial_mask(plan(), state.registry, t, state.rng);
    sparse::MaskSet mask = std::move(init.mask);
    for (auto& ev : init.capacity) state.events.capacity.push_back(ev);
    const bool saturated = mask.active_total() == 0;
    if (saturated) {
      state.events.saturated.push_back(t);
      if (!state.saturation_task) state.saturation_task = t;
    }
    redraw_initial_weights(state, mask);

    const dst::Growth strategy = cfg_.growth.for_task(t + 1);
    dst::GrowthState growth(strategy, mask, state.params, cfg_.momentum_beta);
    if (cfg_.unfired_scope == UnfiredScope::run) {
      for (std::size_t l = 0; l < growth.fired.size(); ++l) growth.fired[l] |= state.fired_run[l];
    }

    nn::OptimState opt(state.params, cfg_.adam, nn::LrSchedule{cfg_.lr, cfg_.lr_milestones, cfg_.lr_factor});
    const std::size_t n = train.size();
    const std::size_t per_epoch = (n + cfg_.batch_size - 1) / cfg_.batch_size;
    const dst::UpdateSchedule schedule = cfg_.schedule_for(cfg_.epochs * per_epoch);

    std::vector<LayerMask> owned;
    for (std::size_t l = 0; l < state.registry.layer_count(); ++l) owned.push_back(state.registry.owned_mask(l));
    std::vector<LayerMask> trainable = trainable_masks(state.params, mask, t);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t iter = 0;
    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      const double lr = opt.schedule.at(epoch, cfg_.epochs);
      std::shuffle(order.begin(), order.end(), state.rng);
      for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
        const std::size_t stop = std::min(n, start + cfg_.batch_size);
        const std::span<const std::size_t> idx(order.data() + start, stop - start);
        const Tensor batch = train.gather(idx);
        std::vector<int> labels;
        labels.reserve(idx.size());
        for (auto i : idx) labels.push_back(train.labels[i]);

        std::vector<LayerMask> eff = owned;
        for (std::size_t l = 0; l < eff.size(); ++l) eff[l] |= mask.layers[l];
        auto fr = nn::forward(model_, state.params, eff, batch, t);
        const auto grads = nn::backward(fr.tape, nn::softmax_cross_entropy(fr.logits, labels));
        nn::adam_step_masked(state.params, grads, trainable, opt, lr);
        ++iter;

        if (!saturated && schedule.fires_at(iter)) {
          std::optional<sparse::MaskSet> before;
          std::vector<Tensor> weights_before;
          if (on_topology) {
            before = mask;
            for (std::size_t l = 0; l < state.params.sparse_count(); ++l) {
              weights_before.push_back(state.params.weight(l).value);
            }
          }
          auto ev = dst::topology_update(state.params, mask, state.registry, opt, grads, growth, iter, schedule,
                                         state.rng);
          for (std::size_t l = 0; l < mask.layers.size(); ++l) trainable[l] = mask.layers[l];
          if (on_topology) on_topology(TopologyProbe{ev, grads, *before, state.registry, weights_before});
          state.events.topology.push_back(std::move(ev));
        }
      }
    }

    if (frozen_digest(state) != frozen_before) {
      throw InvariantError("weights owned by earlier tasks changed while training task " + std::to_string(t + 1));
    }
    if (cfg_.unfired_scope == UnfiredScope::run) {
      for (std::size_t l = 0; l < growth.fired.size(); ++l) state.fired_run[l] |= growth.fired[l];
    }
    state.head_trained[t] = 1;
    return mask;
  }

  /// Hands the task's final mask to the registry and seals its head.
  void freeze_task(RunState& state, std::size_t task, const sparse::MaskSet& final_mask) const {
    if (task != state.next_task) {
      throw InvariantError("freeze of task " + std::to_string(task + 1) + " out of order (expected task " +
                           std::to_string(state.next_task + 1) + ")");
    }
    if (!state.head_trained.at(task)) throw UsageError("task " + std::to_string(task + 1) + " has not been trained");
    sparse::freeze(state.registry, task, final_mask);
    state.final_masks.push_back(final_mask);
    ++state.next_task;
  }

  /// Accuracy on `data_task`'s test split using the head of `data_task` and
  /// the backbone positions owned by tasks 0..context_task.
  double evaluate(const RunState& state, const data::TaskSpec& data_task, std::size_t context_task) const {
    const std::size_t head = data_task.task_id;
    if (head >= state.head_trained.size() || !state.head_trained[head]) {
      throw InputError("cannot evaluate task " + std::to_string(head + 1) + ": its head is untrained");
    }
    if (context_task >= state.next_task) {
      throw InputError("context task " + std::to_string(context_task + 1) + " has not been frozen");
    }
    return accuracy(state, data_task, sparse::context_mask(state.registry, context_task));
  }

  /// Test accuracy of `data_task`'s head under an explicit backbone mask.
  double accuracy(const RunState& state, const data::TaskSpec& data_task, std::span<const LayerMask> ctx) const {
    const std::size_t head = data_task.task_id;
    if (head >= state.head_trained.size() || !state.head_trained[head]) {
      throw InputError("cannot evaluate task " + std::to_string(head + 1) + ": its head is untrained");
    }
    const data::Dataset& test = *data_task.test;
    std::size_t correct = 0;
    constexpr std::size_t kChunk = 256;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < test.size(); start += kChunk) {
      const std::size_t stop = std::min(test.size(), start + kChunk);
      idx.resize(stop - start);
      std::iota(idx.begin(), idx.end(), start);
      const auto fr = nn::forward(model_, state.params, ctx, test.gather(idx), head);
      const std::size_t c = fr.logits.dim(1);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const double* row = fr.logits.data() + r * c;
        const auto pred = std::size_t(std::max_element(row, row + c) - row);
        if (int(pred) == test.labels[idx[r]]) ++correct;
      }
    }
    return double(correct) / double(test.size());
  }

  /// Trains and freezes `tasks` in order starting at state.next_task, filling
  /// the accuracy matrix; forward-transfer cells are filled once the last
  /// task is done. `after_task` runs after each task is frozen and evaluated.
  void run_sequence(RunState& state, const std::vector<data::TaskSpec>& tasks,
                    const std::function<void(const RunState&)>& after_task = {}) const {
    if (tasks.empty()) throw InputError("run_sequence needs at least one task");
    if (tasks.size() != model_.n_tasks) {
      throw DimensionError(std::to_string(tasks.size()) + " tasks supplied, model has " +
                           std::to_string(model_.n_tasks) + " heads");
    }
    for (std::size_t t = state.next_task; t < tasks.size(); ++t) {
      if (tasks[t].task_id != t) throw InputError("task list out of order at position " + std::to_string(t + 1));
      auto mask = train_task(state, tasks[t]);
      freeze_task(state, t, mask);
      for (std::size_t i = 0; i <= t; ++i) state.matrix.set(t, i, evaluate(state, tasks[i], i));
      if (after_task) after_task(state);
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (std::size_t j = i + 1; j < tasks.size(); ++j) {
        if (!state.matrix.has(i, j)) state.matrix.set(i, j, evaluate(state, tasks[j], i));
      }
    }
  }

  /// Hash of every owned backbone value and every trained head.
  static std::uint64_t frozen_digest(const RunState& state) {
    io::Fnv1a h;
    for (std::size_t l = 0; l < state.registry.layer_count(); ++l) {
      const auto& owners = state.registry.owners(l);
      const Tensor& w = state.params.weight(l).value;
      for (std::size_t p = 0; p < owners.size(); ++p) {
        if (owners[p] == sparse::FrozenRegistry::kUnowned) continue;
        h.add_value(p);
        h.add_value(w[p]);
      }
    }
    for (std::size_t t = 0; t < state.head_trained.size(); ++t) {
      if (!state.head_trained[t]) continue;
      for (double v : state.params.head_weight(t).value.values()) h.add_value(v);
      for (double v : state.params.head_bias(t).value.values()) h.add_value(v);
    }
    return h.value();
  }

  /// Hash of the backbone values owned by one task.
  static std::uint64_t task_digest(const RunState& state, std::size_t task) {
    io::Fnv1a h;
    for (std::size_t l = 0; l < state.registry.layer_count(); ++l) {
      const auto& owners = state.registry.owners(l);
      const Tensor& w = state.params.weight(l).value;
      for (std::size_t p = 0; p < owners.size(); ++p) {
        if (owners[p] != std::int32_t(task)) continue;
        h.add_value(l);
        h.add_value(p);
        h.add_value(w[p]);
      }
    }
    return h.value();
  }

 private:
  std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < model_.sparse_layers().size(); ++l) out.push_back(model_.sparse_param_count(l));
    return out;
  }

  /// Current mask per sparse layer, full mask for the task's head, empty elsewhere.
  static std::vector<LayerMask> trainable_masks(const nn::ParamSet& params, const sparse::MaskSet& mask,
                                                std::size_t task) {
    std::vector<LayerMask> out;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      if (i < params.sparse_count()) {
        out.push_back(mask.layers[i]);
      } else if (p.layer_id == task) {
        out.push_back(LayerMask::full(i, p.value.size()));
      } else {
        out.emplace_back(i, p.value.size());
      }
    }
    return out;
  }

  /// Fresh He-normal values for the task's starting positions.
  void redraw_initial_weights(RunState& state, const sparse::MaskSet& mask) const {
    const auto sparse = model_.sparse_layers();
    for (std::size_t l = 0; l < mask.layers.size(); ++l) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(nn::fan_in(model_.layers[sparse[l]]))));
      Tensor& w = state.params.weight(l).value;
      for (std::size_t p = 0; p < w.size(); ++p) {
        if (mask.layers[l].test(p)) w[p] = dist(state.rng);
      }
    }
  }

  nn::ModelSpec model_;
  TrainConfig cfg_;
};

inline constexpr char kCheckpointMagic[8] = {'C', 'D', 'S', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Checkpoint container (little-endian):
///   "CDSTCKPT" u32 version
///   u64 n_tensors, then per tensor: u64 rank, u64 extents[rank], f64 values
///   u64 n_layers, then per layer: u64 size, i32 owner[size] (-1 = unowned)
///   u64 n_masks, then per mask: u64 task, u64 n_layers, per layer u64 size + u8 bits[size]
///   u64 T, then T*T cells: u8 present, f64 value
///   u64 n_heads + u8 trained[n_heads]; u64 next_task; i64 saturation_task (-1 = none)
///   fired_run masks as above (task field 0); RNG state as a length-prefixed string
///   events: topology, capacity and saturation records
inline void save_checkpoint(const RunState& s, std::ostream& os) {
  io::BinaryWriter w(os);
  w.bytes(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion);
  w.u64(s.params.size());
  for (const auto& p : s.params) w.tensor(p.value);
  w.u64(s.registry.layer_count());
  for (std::size_t l = 0; l < s.registry.layer_count(); ++l) {
    const auto& o = s.registry.owners(l);
    w.u64(o.size());
    for (auto v : o) w.u32(std::uint32_t(v));
  }
  const auto put_mask = [&](const sparse::MaskSet& m) {
    w.u64(m.task_id);
    w.u64(m.layers.size());
    for (const auto& lm : m.layers) {
      w.u64(lm.size());
      w.bytes(reinterpret_cast<const char*>(lm.bits().data()), lm.size());
    }
  };
  w.u64(s.final_masks.size());
  for (const auto& m : s.final_masks) put_mask(m);
  const std::size_t T = s.matrix.tasks();
  w.u64(T);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = 0; j < T; ++j) {
      const auto v = s.matrix.get(i, j);
      w.u8(v ? 1 : 0);
      w.f64(v.value_or(0.0));
    }
  }
  w.u64(s.head_trained.size());
  for (auto b : s.head_trained) w.u8(b);
  w.u64(s.next_task);
  w.i64(s.saturation_task ? std::int64_t(*s.saturation_task) : -1);
  put_mask(sparse::MaskSet{0, s.fired_run});
  std::ostringstream rng;
  rng << s.rng;
  w.str(rng.str());

  w.u64(s.events.topology.size());
  for (const auto& ev : s.events.topology) {
    w.u64(ev.task);
    w.u64(ev.iteration);
    w.f64(ev.fraction);
    w.u8(std::uint8_t(ev.strategy));
    w.u64(ev.layers.size());
    for (const auto& ch : ev.layers) {
      w.u64(ch.requested);
      w.u64(ch.candidates);
      w.u8(std::uint8_t((ch.capacity ? 1 : 0) | (ch.pool_limited ? 2 : 0)));
      w.u64(ch.dropped.size());
      for (auto p : ch.dropped) w.u64(p);
      w.u64(ch.grown.size());
      for (auto p : ch.grown) w.u64(p);
    }
  }
  w.u64(s.events.capacity.size());
  for (const auto& c : s.events.capacity) {
    w.u64(c.task);
    w.u64(c.layer);
    w.u64(c.requested);
    w.u64(c.granted);
  }
  w.u64(s.events.saturated.size());
  for (auto t : s.events.saturated) w.u64(t);
}

/// Restores a state written by save_checkpoint for the same model.
inline RunState load_checkpoint(const nn::ModelSpec& model, std::istream& is, const std::string& name = "checkpoint") {
  io::BinaryReader r(is, name);
  char magic[8];
  r.bytes(magic, 8);
  if (!std::equal(magic, magic + 8, kCheckpointMagic)) throw IoError(name + ": bad checkpoint magic at byte offset 0");
  if (r.u32() != kCheckpointVersion) throw IoError(name + ": unsupported checkpoint version at byte offset 8");
  const auto bad = [&](const std::string& what) {
    return IoError(name + ": " + what + " near byte offset " + std::to_string(r.offset()));
  };
  RunState s;
  s.params = nn::ParamSet(model);
  if (r.u64() != s.params.size()) throw bad("parameter tensor count does not match the model");
  for (auto& p : s.params) {
    Tensor t = r.tensor();
    if (t.shape() != p.value.shape()) throw bad("parameter shape does not match the model");
    p.value = std::move(t);
  }
  std::vector<std::vector<std::int32_t>> owners(r.u64());
  if (owners.size() != s.params.sparse_count()) throw bad("registry layer count does not match the model");
  for (std::size_t l = 0; l < owners.size(); ++l) {
    owners[l].resize(r.u64());
    if (owners[l].size() != s.params.weight(l).value.size()) throw bad("registry layer size mismatch");
    for (auto& v : owners[l]) v = std::int32_t(r.u32());
  }
  s.registry = sparse::FrozenRegistry::from_owners(std::move(owners));
  const auto get_mask = [&]() {
    sparse::MaskSet m;
    m.task_id = r.u64();
    const auto L = r.u64();
    if (L != s.registry.layer_count()) throw bad("mask layer count mismatch");
    for (std::size_t l = 0; l < L; ++l) {
      const auto n = r.u64();
      if (n != s.registry.layer_size(l)) throw bad("mask size mismatch");
      std::vector<char> bits(n);
      r.bytes(bits.data(), n);
      LayerMask lm(l, n);
      for (std::size_t p = 0; p < n; ++p) {
        if (bits[p]) lm.set(p);
      }
      m.layers.push_back(std::move(lm));
    }
    return m;
  };
  const auto n_masks = r.u64();
  for (std::uint64_t i = 0; i < n_masks; ++i) s.final_masks.push_back(get_mask());
  const auto T = r.u64();
  if (T != model.n_tasks) throw bad("accuracy matrix size does not match the model");
  s.matrix = metrics::AccuracyMatrix(T);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = 0; j < T; ++j) {
      const bool present = r.u8() != 0;
      const double v = r.f64();
      if (present) s.matrix.set(i, j, v);
    }
  }
  s.head_trained.resize(r.u64());
  for (auto& b : s.head_trained) b = r.u8();
  s.next_task = r.u64();
  const auto sat = r.i64();
  if (sat >= 0) s.saturation_task = std::size_t(sat);
  s.fired_run = get_mask().layers;
  std::istringstream rng(r.str());
  rng >> s.rng;
  if (!rng) throw bad("corrupt RNG state");

  const auto n_topo = r.u64();
  for (std::uint64_t e = 0; e < n_topo; ++e) {
    dst::TopologyEvent ev;
    ev.task = r.u64();
    ev.iteration = r.u64();
    ev.fraction = r.f64();
    ev.strategy = dst::Growth(r.u8());
    ev.layers.resize(r.u64());
    for (auto& ch : ev.layers) {
      ch.requested = r.u64();
      ch.candidates = r.u64();
      const auto flags = r.u8();
      ch.capacity = flags & 1;
      ch.pool_limited = flags & 2;
      ch.dropped.resize(r.u64());
      for (auto& p : ch.dropped) p = r.u64();
      ch.grown.resize(r.u64());
      for (auto& p : ch.grown) p = r.u64();
    }
    s.events.topology.push_back(std::move(ev));
  }
  s.events.capacity.resize(r.u64());
  for (auto& c : s.events.capacity) {
    c.task = r.u64();
    c.layer = r.u64();
    c.requested = r.u64();
    c.granted = r.u64();
  }
  s.events.saturated.resize(r.u64());
  for (auto& t : s.events.saturated) t = r.u64();
  return s;
}

inline void save_checkpoint_file(const RunState& s, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint '" + path + "'");
  save_checkpoint(s, os);
  if (!os) throw IoError("failed writing checkpoint '" + path + "'");
}

inline RunState load_checkpoint_file(const nn::ModelSpec& model, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(model, is, path);
}

}  // namespace cdst::continual
