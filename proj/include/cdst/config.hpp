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

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdst/continual.hpp"
#include "cdst/data.hpp"
#include "cdst/dst.hpp"
#include "cdst/metrics.hpp"
#include "cdst/model.hpp"
#include "cdst/sparse_mask.hpp"

namespace cdst::config {

inline constexpr const char* kEchoHeader = "# cdst experiment config";
inline constexpr const char* kOutRootEnv = "CDST_OUT_ROOT";

struct DataConfig {
  std::string source = "synthetic";  // synthetic | binary | csv
  std::size_t tasks = 5;
  std::size_t classes_per_task = 5;  // synthetic only; file data derives it
  std::size_t dim = 16;
  std::size_t samples_per_class = 100;
  double separation = 10.0;
  std::uint64_t seed = 0;
  std::string features;
  std::string labels;
  bool csv_header = false;
  Shape sample_shape;
  std::string class_order = "identity";  // identity | shuffle:<seed>
  double test_fraction = 0.2;
};

struct SweepAxes {
  std::vector<double> sparsity{0.9};
  std::vector<sparse::InitStrategy> init{sparse::InitStrategy::uniform};
  std::vector<std::string> growth{"random"};  // a growth name or "adaptive"
  std::vector<std::size_t> delta_t{100};
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

/// One point of the sweep grid.
struct Cell {
  double sparsity = 0.9;
  sparse::InitStrategy init = sparse::InitStrategy::uniform;
  std::string growth = "random";
  std::size_t delta_t = 100;

  std::string name() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", sparsity);
    return std::string("S") + buf + "-" + sparse::to_string(init) + "-" + growth + "-dt" + std::to_string(delta_t);
  }
};

struct ExperimentConfig {
  continual::TrainConfig train;  // sparsity, init, growth, delta_t and seed come from the sweep axes
  std::string layers = "affine:64,relu,affine:64,relu";
  DataConfig data;
  SweepAxes sweep;
  dst::GrowthPolicy adaptive = dst::GrowthPolicy::default_adaptive();
  std::string out_dir;  // empty: $CDST_OUT_ROOT or ./cdst_runs

  std::string resolved_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* root = std::getenv(kOutRootEnv); root && *root) return root;
    return "cdst_runs";
  }

  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (double s : sweep.sparsity) {
      for (auto i : sweep.init) {
        for (const auto& g : sweep.growth) {
          for (auto d : sweep.delta_t) out.push_back({s, i, g, d});
        }
      }
    }
    return out;
  }

  continual::TrainConfig train_config(const Cell& cell, std::uint64_t seed) const {
    continual::TrainConfig c = train;
    c.sparsity = cell.sparsity;
    c.init = cell.init;
    c.delta_t = cell.delta_t;
    c.seed = seed;
    c.growth = cell.growth == "adaptive" ? adaptive : dst::GrowthPolicy::constant(dst::parse_growth(cell.growth));
    return c;
  }

  /// Same config restricted to one cell and one seed.
  ExperimentConfig narrowed(const Cell& cell, std::uint64_t seed) const {
    ExperimentConfig c = *this;
    c.sweep.sparsity = {cell.sparsity};
    c.sweep.init = {cell.init};
    c.sweep.growth = {cell.growth};
    c.sweep.delta_t = {cell.delta_t};
    c.sweep.seeds = {seed};
    return c;
  }

  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return d;
}

inline std::uint64_t to_uint(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return std::stoull(v);
}

inline bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F&& conv) {
  std::vector<T> out;
  for (const auto& item : split(v, ',')) out.push_back(conv(item));
  if (out.empty()) throw ConfigError("list is empty");
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
  return out;
}

inline std::string fmt_double(double v) { return metrics::format_double(v); }

inline std::string growth_name(const std::string& v) {
  if (v != "adaptive") dst::parse_growth(v);
  return v;
}

struct Key {
  const char* name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  static const std::vector<Key> k = {
      {"train.epochs", [](C& c, const std::string& v) { c.train.epochs = to_uint(v); },
       [](const C& c) { return std::to_string(c.train.epochs); }},
      {"train.batch_size", [](C& c, const std::string& v) { c.train.batch_size = to_uint(v); },
       [](const C& c) { return std::to_string(c.train.batch_size); }},
      {"train.lr", [](C& c, const std::string& v) { c.train.lr = to_double(v); },
       [](const C& c) { return fmt_double(c.train.lr); }},
      {"train.lr_milestones",
       [](C& c, const std::string& v) { c.train.lr_milestones = v.empty() ? std::vector<double>{} : to_list<double>(v, to_double); },
       [](const C& c) { return join(c.train.lr_milestones, fmt_double); }},
      {"train.lr_factor", [](C& c, const std::string& v) { c.train.lr_factor = to_double(v); },
       [](const C& c) { return fmt_double(c.train.lr_factor); }},
      {"train.adam_beta1", [](C& c, const std::string& v) { c.train.adam.beta1 = to_double(v); },
       [](const C& c) { return fmt_double(c.train.adam.beta1); }},
      {"train.adam_beta2", [](C& c, const std::string& v) { c.train.adam.beta2 = to_double(v); },
       [](const C& c) { return fmt_double(c.train.adam.beta2); }},
      {"train.adam_eps", [](C& c, const std::string& v) { c.train.adam.epsilon = to_double(v); },
       [](const C& c) { return fmt_double(c.train.adam.epsilon); }},
      {"dst.alpha", [](C& c, const std::string& v) { c.train.alpha = to_double(v); },
       [](const C& c) { return fmt_double(c.train.alpha); }},
      {"dst.t_end_fraction", [](C& c, const std::string& v) { c.train.t_end_fraction = to_double(v); },
       [](const C& c) { return fmt_double(c.train.t_end_fraction); }},
      {"dst.t_end",
       [](C& c, const std::string& v) {
         c.train.t_end = v.empty() ? std::nullopt : std::optional<std::size_t>(to_uint(v));
       },
       [](const C& c) { return c.train.t_end ? std::to_string(*c.train.t_end) : std::string(); }},
      {"dst.momentum_beta", [](C& c, const std::string& v) { c.train.momentum_beta = to_double(v); },
       [](const C& c) { return fmt_double(c.train.momentum_beta); }},
      {"dst.unfired_scope",
       [](C& c, const std::string& v) {
         if (v == "task") c.train.unfired_scope = continual::UnfiredScope::task;
         else if (v == "run") c.train.unfired_scope = continual::UnfiredScope::run;
         else throw ConfigError("expected task or run, got '" + v + "'");
       },
       [](const C& c) { return std::string(c.train.unfired_scope == continual::UnfiredScope::run ? "run" : "task"); }},
      {"dst.adaptive_policy", [](C& c, const std::string& v) { c.adaptive = dst::GrowthPolicy::parse(v); },
       [](const C& c) { return c.adaptive.str(); }},
      {"model.layers", [](C& c, const std::string& v) { c.layers = v; }, [](const C& c) { return c.layers; }},
      {"data.source",
       [](C& c, const std::string& v) {
         if (v != "synthetic" && v != "binary" && v != "csv") {
           throw ConfigError("expected synthetic, binary or csv, got '" + v + "'");
         }
         c.data.source = v;
       },
       [](const C& c) { return c.data.source; }},
      {"data.tasks", [](C& c, const std::string& v) { c.data.tasks = to_uint(v); },
       [](const C& c) { return std::to_string(c.data.tasks); }},
      {"data.classes_per_task", [](C& c, const std::string& v) { c.data.classes_per_task = to_uint(v); },
       [](const C& c) { return std::to_string(c.data.classes_per_task); }},
      {"data.dim", [](C& c, const std::string& v) { c.data.dim = to_uint(v); },
       [](const C& c) { return std::to_string(c.data.dim); }},
      {"data.samples_per_class", [](C& c, const std::string& v) { c.data.samples_per_class = to_uint(v); },
       [](const C& c) { return std::to_string(c.data.samples_per_class); }},
      {"data.separation", [](C& c, const std::string& v) { c.data.separation = to_double(v); },
       [](const C& c) { return fmt_double(c.data.separation); }},
      {"data.seed", [](C& c, const std::string& v) { c.data.seed = to_uint(v); },
       [](const C& c) { return std::to_string(c.data.seed); }},
      {"data.features", [](C& c, const std::string& v) { c.data.features = v; },
       [](const C& c) { return c.data.features; }},
      {"data.labels", [](C& c, const std::string& v) { c.data.labels = v; },
       [](const C& c) { return c.data.labels; }},
      {"data.csv_header", [](C& c, const std::string& v) { c.data.csv_header = to_bool(v); },
       [](const C& c) { return std::string(c.data.csv_header ? "true" : "false"); }},
      {"data.sample_shape",
       [](C& c, const std::string& v) {
         c.data.sample_shape = v.empty() ? Shape{} : to_list<std::size_t>(v, [](const std::string& s) {
           return std::size_t(to_uint(s));
         });
       },
       [](const C& c) { return join(c.data.sample_shape, [](std::size_t x) { return std::to_string(x); }); }},
      {"data.class_order",
       [](C& c, const std::string& v) {
         if (v != "identity" && !(v.rfind("shuffle:", 0) == 0 && (to_uint(v.substr(8)), true))) {
           throw ConfigError("expected identity or shuffle:<seed>, got '" + v + "'");
         }
         c.data.class_order = v;
       },
       [](const C& c) { return c.data.class_order; }},
      {"data.test_fraction", [](C& c, const std::string& v) { c.data.test_fraction = to_double(v); },
       [](const C& c) { return fmt_double(c.data.test_fraction); }},
      {"sweep.sparsity", [](C& c, const std::string& v) { c.sweep.sparsity = to_list<double>(v, to_double); },
       [](const C& c) { return join(c.sweep.sparsity, fmt_double); }},
      {"sweep.init",
       [](C& c, const std::string& v) {
         c.sweep.init = to_list<sparse::InitStrategy>(v, sparse::parse_init_strategy);
       },
       [](const C& c) {
         return join(c.sweep.init, [](sparse::InitStrategy s) { return std::string(sparse::to_string(s)); });
       }},
      {"sweep.growth", [](C& c, const std::string& v) { c.sweep.growth = to_list<std::string>(v, growth_name); },
       [](const C& c) { return join(c.sweep.growth, [](const std::string& s) { return s; }); }},
      {"sweep.delta_t",
       [](C& c, const std::string& v) {
         c.sweep.delta_t = to_list<std::size_t>(v, [](const std::string& s) { return std::size_t(to_uint(s)); });
       },
       [](const C& c) { return join(c.sweep.delta_t, [](std::size_t x) { return std::to_string(x); }); }},
      {"sweep.seeds", [](C& c, const std::string& v) { c.sweep.seeds = to_list<std::uint64_t>(v, to_uint); },
       [](const C& c) { return join(c.sweep.seeds, [](std::uint64_t x) { return std::to_string(x); }); }},
      {"output.dir", [](C& c, const std::string& v) { c.out_dir = v; }, [](const C& c) { return c.out_dir; }},
  };
  return k;
}

}  // namespace detail

/// Applies one key; errors name the key.
inline void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : detail::keys()) {
    if (key != k.name) continue;
    try {
      k.set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
    return;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

/// `key = value` lines; blank lines and lines starting with '#' are ignored.
inline std::vector<std::pair<std::string, std::string>> read_pairs(std::istream& is, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::map<std::string, std::size_t> seen;
  std::string line;
  for (std::size_t no = 1; std::getline(is, line); ++no) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + " line " + std::to_string(no) + ": expected key = value");
    }
    std::string key = detail::trim(t.substr(0, eq));
    if (auto [it, fresh] = seen.emplace(key, no); !fresh) {
      throw ConfigError(source + " line " + std::to_string(no) + ": config key '" + key + "' repeats line " +
                        std::to_string(it->second));
    }
    out.emplace_back(std::move(key), detail::trim(t.substr(eq + 1)));
  }
  return out;
}

/// File values first, then `overrides` in order (later wins).
inline ExperimentConfig parse_config(std::istream& is, const std::string& source,
                                     const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : read_pairs(is, source)) set_key(cfg, k, v);
  for (const auto& [k, v] : overrides) set_key(cfg, k, v);
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path,
                                          const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path, overrides);
}

/// Every key with its resolved value; parse_config of the output yields an
/// identical configuration.
inline void write_config_echo(const ExperimentConfig& cfg, std::ostream& os) {
  os << kEchoHeader << '\n';
  for (const auto& k : detail::keys()) os << k.name << " = " << k.get(cfg) << '\n';
}

/// Builds the layer list from a string such as
/// "conv:16:3:1:1,relu,flatten,affine:64,relu" given the sample shape.
/// conv:<out>:<kernel>[:<stride>[:<padding>]], affine:<out>, relu, flatten.
inline nn::ModelSpec build_model(const std::string& layers, const Shape& sample_shape, std::size_t n_tasks,
                                 std::size_t classes_per_task) {
  nn::ModelSpec m;
  m.input_shape = sample_shape;
  m.n_tasks = n_tasks;
  m.classes_per_task = classes_per_task;
  Shape cur = sample_shape;
  for (const auto& item : detail::split(layers, ',')) {
    const auto parts = detail::split(item, ':');
    const std::string& kind = parts.at(0);
    const auto arg = [&](std::size_t i) {
      if (i >= parts.size()) throw ConfigError("layer '" + item + "' is missing an argument");
      return std::size_t(detail::to_uint(parts[i]));
    };
    if (kind == "relu" && parts.size() == 1) {
      m.layers.push_back(nn::Relu{});
    } else if (kind == "flatten" && parts.size() == 1) {
      m.layers.push_back(nn::Flatten{});
      cur = {shape_size(cur)};
    } else if (kind == "affine" && parts.size() == 2) {
      if (cur.size() != 1) throw ConfigError("layer '" + item + "' needs a flat input; add flatten first");
      m.layers.push_back(nn::Affine{cur[0], arg(1)});
      cur = {arg(1)};
    } else if (kind == "conv" && parts.size() >= 3 && parts.size() <= 5) {
      if (cur.size() != 3) throw ConfigError("layer '" + item + "' needs a (C,H,W) input");
      nn::Conv2d c{cur[0], arg(1), arg(2), arg(2), parts.size() > 3 ? arg(3) : 1, parts.size() > 4 ? arg(4) : 0};
      if (c.stride == 0) throw ConfigError("layer '" + item + "' has stride 0");
      const std::size_t hp = cur[1] + 2 * c.padding, wp = cur[2] + 2 * c.padding;
      if (hp < c.kernel_h || wp < c.kernel_w) throw ConfigError("layer '" + item + "' kernel exceeds its input");
      cur = {c.c_out, (hp - c.kernel_h) / c.stride + 1, (wp - c.kernel_w) / c.stride + 1};
      m.layers.push_back(c);
    } else {
      throw ConfigError("unrecognised layer '" + item + "'");
    }
  }
  if (cur.size() != 1) throw ConfigError("model.layers must end with a flat output (add flatten)");
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError("model.layers: " + std::string(e.what()));
  }
  return m;
}

/// Task data described by the data block.
inline data::TaskSplit build_tasks(const DataConfig& d) {
  if (d.source == "synthetic") {
    return data::make_synthetic_tasks(d.tasks, d.classes_per_task, d.dim, d.samples_per_class, d.separation, d.seed);
  }
  if (d.features.empty()) throw ConfigError("config key 'data.features' is required for source " + d.source);
  data::RawFormat fmt;
  fmt.kind = d.source == "csv" ? data::RawFormat::Kind::csv : data::RawFormat::Kind::flat_binary;
  fmt.labels_path = d.labels;
  fmt.csv_header = d.csv_header;
  fmt.csv_sample_shape = d.sample_shape;
  const auto ds = data::load_raw_dataset(d.features, fmt);
  const auto order = d.class_order == "identity"
                         ? data::ClassOrder::identity(ds.classes)
                         : data::ClassOrder::shuffled(ds.classes, detail::to_uint(d.class_order.substr(8)));
  return data::split_by_classes(ds, d.tasks, order, d.test_fraction);
}

inline void ExperimentConfig::validate() const {
  const auto fail = [](const char* key, const std::string& msg) {
    throw ConfigError("config key '" + std::string(key) + "': " + msg);
  };
  if (data.tasks == 0) fail("data.tasks", "must be positive");
  if (data.source == "synthetic") {
    if (data.classes_per_task == 0 || data.dim == 0 || data.samples_per_class == 0) {
      fail("data", "synthetic counts must be positive");
    }
    if (!(data.separation > 0.0)) fail("data.separation", "must be positive");
  } else if (data.source == "binary" && data.labels.empty()) {
    fail("data.labels", "required for binary data");
  }
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) fail("data.test_fraction", "must lie in (0, 1)");
  if (!(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0)) fail("train.adam_beta1", "must lie in [0, 1)");
  if (!(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0)) fail("train.adam_beta2", "must lie in [0, 1)");
  if (!(train.adam.epsilon > 0.0)) fail("train.adam_eps", "must be positive");
  if (sweep.sparsity.empty()) fail("sweep.sparsity", "axis is empty");
  if (sweep.init.empty()) fail("sweep.init", "axis is empty");
  if (sweep.growth.empty()) fail("sweep.growth", "axis is empty");
  if (sweep.delta_t.empty()) fail("sweep.delta_t", "axis is empty");
  if (sweep.seeds.empty()) fail("sweep.seeds", "axis is empty");
  for (const auto& g : sweep.growth) {
    if (g != "adaptive") continue;
    try {
      adaptive.validate(data.tasks);
    } catch (const ConfigError& e) {
      fail("dst.adaptive_policy", e.what());
    }
  }
  for (const auto& cell : cells()) {
    try {
      auto c = train_config(cell, sweep.seeds.front());
      c.growth = dst::GrowthPolicy::constant(dst::Growth::random);
      c.validate(data.tasks);
    } catch (const ConfigError& e) {
      fail("sweep", "cell " + cell.name() + ": " + e.what());
    }
  }
  if (data.source == "synthetic") {
    try {
      build_model(layers, {data.dim}, data.tasks, data.classes_per_task);
    } catch (const ConfigError& e) {
      fail("model.layers", e.what());
    }
  }
}

}  // namespace cdst::config
