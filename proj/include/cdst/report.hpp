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

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "cdst/continual.hpp"
#include "cdst/metrics.hpp"
#include "cdst/sparse_mask.hpp"

namespace cdst::report {

namespace fs = std::filesystem;

inline constexpr const char* kSchemaVersion = "cdst-report v1";

/// kind is one of topology, capacity, saturation. Task numbers are 1-based.
/// Topology rows carry one line per sparse layer; n_requested is the swap
/// count before clamping to the growth pool.
inline void write_events_csv(const continual::EventLog& log, std::ostream& os) {
  os << "# " << kSchemaVersion << " events\n";
  os << "kind,task,iteration,layer,strategy,n_drop,n_grow,fraction,capacity_flag,n_requested,n_granted\n";
  for (const auto& ev : log.topology) {
    for (std::size_t l = 0; l < ev.layers.size(); ++l) {
      const auto& ch = ev.layers[l];
      os << "topology," << (ev.task + 1) << ',' << ev.iteration << ',' << l << ',' << dst::to_string(ev.strategy)
         << ',' << ch.dropped.size() << ',' << ch.grown.size() << ',' << metrics::format_double(ev.fraction) << ','
         << (ch.capacity ? 1 : 0) << ',' << ch.requested << ',' << ch.grown.size() << '\n';
    }
  }
  for (const auto& c : log.capacity) {
    os << "capacity," << (c.task + 1) << ",0," << c.layer << ",,0,0,,1," << c.requested << ',' << c.granted << '\n';
  }
  for (auto t : log.saturated) os << "saturation," << (t + 1) << ",0,,,0,0,,1,,\n";
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

/// Writes accuracy_matrix.csv, metrics.csv, events.csv, plot_data.csv and
/// masks.csv for one finished (or checkpointed) run into `dir`.
inline metrics::Metrics write_report(const continual::RunState& state, const fs::path& dir,
                                     const std::string& seed_label) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  {
    auto os = open_out(dir / "accuracy_matrix.csv");
    metrics::write_matrix_csv(state.matrix, os);
  }
  metrics::Metrics m{};
  const bool complete = state.next_task == state.matrix.tasks();
  if (complete) {
    m = metrics::compute_all(state.matrix);
    auto os = open_out(dir / "metrics.csv");
    metrics::write_metrics_csv({{seed_label, m}}, os);
    if (state.saturation_task) os << "# saturation_task=" << (*state.saturation_task + 1) << '\n';
  }
  {
    auto os = open_out(dir / "events.csv");
    write_events_csv(state.events, os);
  }
  {
    auto os = open_out(dir / "plot_data.csv");
    metrics::write_plot_data(state.matrix, os);
  }
  {
    auto os = open_out(dir / "masks.csv");
    sparse::write_mask_csv(state.registry, os);
  }
  return m;
}

}  // namespace cdst::report
