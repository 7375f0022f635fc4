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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "cdst/config.hpp"
#include "cdst/continual.hpp"
#include "cdst/metrics.hpp"
#include "cdst/report.hpp"

namespace cdst::sweep {

namespace fs = std::filesystem;

struct Options {
  std::size_t jobs = 1;
  bool overwrite = false;
  bool resume = false;  // continue from per-run checkpoints; finished runs are kept
  std::ostream* log = nullptr;
  /// Called before each run starts; throwing marks that run failed.
  std::function<void(const config::Cell&, std::uint64_t)> before_run;
};

struct RunResult {
  config::Cell cell;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  metrics::Metrics metrics;
  std::optional<std::size_t> saturation_task;
};

struct Summary {
  std::vector<RunResult> runs;
  std::size_t failed() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += !r.ok;
    return n;
  }
};

inline fs::path cell_dir(const fs::path& out, const config::Cell& c) { return out / c.name(); }
inline fs::path run_dir(const fs::path& out, const config::Cell& c, std::uint64_t seed) {
  return cell_dir(out, c) / ("seed-" + std::to_string(seed));
}

/// Cell list and run count, one line per cell.
inline void describe(const config::ExperimentConfig& cfg, std::ostream& os) {
  const auto cells = cfg.cells();
  const fs::path out = cfg.resolved_out_dir();
  os << "cells: " << cfg.sweep.sparsity.size() << " sparsity x " << cfg.sweep.init.size() << " init x "
     << cfg.sweep.growth.size() << " growth x " << cfg.sweep.delta_t.size() << " delta_t = " << cells.size() << '\n';
  os << "runs: " << cells.size() << " cells x " << cfg.sweep.seeds.size() << " seeds = "
     << cells.size() * cfg.sweep.seeds.size() << '\n';
  for (const auto& c : cells) os << "  " << c.name() << " -> " << cell_dir(out, c).string() << '\n';
}

/// Trains one cell and seed and writes its report and config echo into `dir`.
inline RunResult run_one(const config::ExperimentConfig& cfg, const config::Cell& cell, std::uint64_t seed,
                         const data::TaskSplit& split, const fs::path& dir, bool resume) {
  RunResult r{cell, seed, false, {}, {}, {}};
  const auto model = config::build_model(cfg.layers, split.tasks.at(0).train->sample_shape(), split.tasks.size(),
                                         split.classes_per_task);
  continual::Engine engine(model, cfg.train_config(cell, seed));
  fs::create_directories(dir);
  {
    auto os = report::open_out(dir / "config.cfg");
    config::write_config_echo(cfg.narrowed(cell, seed), os);
  }
  const fs::path ckpt = dir / "checkpoint.bin";
  continual::RunState state =
      resume && fs::exists(ckpt) ? continual::load_checkpoint_file(model, ckpt.string()) : engine.init_state();
  try {
    engine.run_sequence(state, split.tasks, [&](const continual::RunState& s) {
      continual::save_checkpoint_file(s, ckpt.string());
    });
  } catch (...) {
    report::write_report(state, dir, std::to_string(seed));
    throw;
  }
  r.metrics = report::write_report(state, dir, std::to_string(seed));
  r.saturation_task = state.saturation_task;
  r.ok = true;
  return r;
}

namespace detail {

inline bool is_our_output(const fs::path& out) {
  std::ifstream in(out / "config.cfg");
  std::string first;
  return in && std::getline(in, first) && first == config::kEchoHeader;
}

inline void prepare_output(const fs::path& out, const Options& opt) {
  if (fs::exists(out) && !fs::is_directory(out)) throw IoError("output path '" + out.string() + "' is a file");
  if (fs::exists(out) && !fs::is_empty(out) && !opt.resume) {
    if (!opt.overwrite) {
      throw IoError("output directory '" + out.string() + "' is not empty; pass --overwrite to replace it");
    }
    if (!is_our_output(out)) {
      throw IoError("refusing to overwrite '" + out.string() + "': it does not hold a previous sweep");
    }
    fs::remove_all(out);
  }
  fs::create_directories(out);
}

inline void write_summary(const config::ExperimentConfig& cfg, const Summary& s, const fs::path& out) {
  auto os = report::open_out(out / "summary.csv");
  os << "# " << report::kSchemaVersion << " summary\n";
  os << "# " << metrics::kFwtConvention << '\n';
  os << "cell,sparsity,init,growth,delta_t,seeds_ok,seeds_failed,acc_mean,acc_std,bwt_mean,bwt_std,fwt_mean,fwt_std,"
        "saturation_task\n";
  for (const auto& cell : cfg.cells()) {
    std::vector<metrics::SeedMetrics> rows;
    std::size_t failed = 0;
    std::string saturation;
    for (const auto& r : s.runs) {
      if (r.cell.name() != cell.name()) continue;
      if (!r.ok) {
        ++failed;
        continue;
      }
      rows.push_back({std::to_string(r.seed), r.metrics});
      if (r.saturation_task) {
        saturation += (saturation.empty() ? "" : ";") + std::to_string(*r.saturation_task + 1);
      }
    }
    if (!rows.empty()) {
      auto cm = report::open_out(cell_dir(out, cell) / "metrics.csv");
      metrics::write_metrics_csv(rows, cm);
    }
    std::stringstream agg;
    metrics::write_metrics_csv(rows, agg);
    std::string mean_line, std_line, line;
    while (std::getline(agg, line)) {
      if (line.rfind("mean,", 0) == 0) mean_line = line.substr(5);
      if (line.rfind("std,", 0) == 0) std_line = line.substr(4);
    }
    const auto m = config::detail::split(mean_line, ',');
    const auto d = config::detail::split(std_line, ',');
    const auto pick = [](const std::vector<std::string>& v, std::size_t i) { return i < v.size() ? v[i] : ""; };
    os << cell.name() << ',' << metrics::format_double(cell.sparsity) << ',' << sparse::to_string(cell.init) << ','
       << cell.growth << ',' << cell.delta_t << ',' << rows.size() << ',' << failed << ',' << pick(m, 0) << ','
       << pick(d, 0) << ',' << pick(m, 1) << ',' << pick(d, 1) << ',' << pick(m, 2) << ',' << pick(d, 2) << ','
       << saturation << '\n';
  }
}

}  // namespace detail

/// Runs every cell x seed into `cfg.resolved_out_dir()`. Run failures are
/// recorded in the summary and in failures.csv; they do not stop other runs.
inline Summary run_sweep(const config::ExperimentConfig& cfg, const Options& opt = {}) {
  cfg.validate();
  const fs::path out = cfg.resolved_out_dir();
  const auto split = config::build_tasks(cfg.data);
  config::build_model(cfg.layers, split.tasks.at(0).train->sample_shape(), split.tasks.size(),
                      split.classes_per_task);
  detail::prepare_output(out, opt);
  {
    auto os = report::open_out(out / "config.cfg");
    config::write_config_echo(cfg, os);
  }

  Summary s;
  for (const auto& cell : cfg.cells()) {
    for (auto seed : cfg.sweep.seeds) s.runs.push_back({cell, seed, false, {}, {}, {}});
  }
  std::mutex log_mu;
  const auto log = [&](const std::string& msg) {
    if (!opt.log) return;
    std::lock_guard lock(log_mu);
    *opt.log << msg << std::endl;
  };
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < s.runs.size(); i = next++) {
      auto& r = s.runs[i];
      const fs::path dir = run_dir(out, r.cell, r.seed);
      if (opt.resume && fs::exists(dir / "metrics.csv") && fs::exists(dir / "checkpoint.bin")) {
        try {
          const auto model = config::build_model(cfg.layers, split.tasks.at(0).train->sample_shape(),
                                                 split.tasks.size(), split.classes_per_task);
          const auto st = continual::load_checkpoint_file(model, (dir / "checkpoint.bin").string());
          if (st.next_task == split.tasks.size()) {
            r.metrics = metrics::compute_all(st.matrix);
            r.saturation_task = st.saturation_task;
            r.ok = true;
            log("kept " + dir.string());
            continue;
          }
        } catch (const Error&) {
        }
      }
      try {
        if (opt.before_run) opt.before_run(r.cell, r.seed);
        r = run_one(cfg, r.cell, r.seed, split, dir, opt.resume);
        log("done " + dir.string() + " acc=" + metrics::format_double(r.metrics.acc));
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
        log("FAILED " + dir.string() + ": " + r.error);
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, s.runs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  detail::write_summary(cfg, s, out);
  std::error_code ec;
  fs::remove(out / "failures.csv", ec);
  if (s.failed() > 0) {
    auto os = report::open_out(out / "failures.csv");
    os << "cell,seed,error\n";
    for (const auto& r : s.runs) {
      if (r.ok) continue;
      std::string err = r.error;
      std::replace(err.begin(), err.end(), '\n', ' ');
      std::replace(err.begin(), err.end(), '"', '\'');
      os << r.cell.name() << ',' << r.seed << ",\"" << err << "\"\n";
    }
  }
  return s;
}

/// Metrics recomputed from one accuracy_matrix.csv.
inline metrics::Metrics recompute(const fs::path& matrix_csv) {
  std::ifstream in(matrix_csv);
  if (!in) throw IoError("cannot read '" + matrix_csv.string() + "'");
  return metrics::compute_all(metrics::read_matrix_csv(in));
}

}  // namespace cdst::sweep
