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

// cdst: run, report and dry-run continual sparse-training sweeps.
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime error, 3 some sweep
// runs failed.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cdst/config.hpp"
#include "cdst/sweep.hpp"

namespace fs = std::filesystem;
using namespace cdst;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kPartial = 3 };

struct Flags {
  std::string config;
  std::vector<std::string> set;
  std::string seed, sparsity, init, growth, delta_t, out;
  std::size_t jobs = 1;
  bool overwrite = false;
  bool resume = false;
  bool dry_run = false;
};

void add_config_flags(CLI::App* app, Flags& f) {
  app->add_option("-c,--config", f.config, "experiment config file (key = value lines)");
  app->add_option("--seed", f.seed, "seed list, e.g. 1,2,3 (sweep.seeds)");
  app->add_option("--sparsity", f.sparsity, "sparsity list (sweep.sparsity)");
  app->add_option("--init", f.init, "uniform|erk, comma separated (sweep.init)");
  app->add_option("--growth", f.growth, "random|unfired|gradient|momentum|adaptive, comma separated (sweep.growth)");
  app->add_option("--delta-t", f.delta_t, "topology update interval list (sweep.delta_t)");
  app->add_option("--out", f.out, "output directory (output.dir); default $CDST_OUT_ROOT or ./cdst_runs");
  app->add_option("--set", f.set, "extra key=value override, repeatable");
}

config::ExperimentConfig load(const Flags& f) {
  std::vector<std::pair<std::string, std::string>> ov;
  const auto add = [&](const char* key, const std::string& v) {
    if (!v.empty()) ov.emplace_back(key, v);
  };
  add("sweep.seeds", f.seed);
  add("sweep.sparsity", f.sparsity);
  add("sweep.init", f.init);
  add("sweep.growth", f.growth);
  add("sweep.delta_t", f.delta_t);
  add("output.dir", f.out);
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    ov.emplace_back(config::detail::trim(kv.substr(0, eq)), config::detail::trim(kv.substr(eq + 1)));
  }
  if (f.config.empty()) {
    std::istringstream empty;
    return config::parse_config(empty, "<defaults>", ov);
  }
  return config::parse_config_file(f.config, ov);
}

int cmd_run(const Flags& f) {
  const auto cfg = load(f);
  if (f.dry_run) {
    sweep::describe(cfg, std::cout);
    return kOk;
  }
  sweep::describe(cfg, std::cerr);
  sweep::Options opt;
  opt.jobs = f.jobs;
  opt.overwrite = f.overwrite;
  opt.resume = f.resume;
  opt.log = &std::cerr;
  const auto s = sweep::run_sweep(cfg, opt);
  const fs::path out = cfg.resolved_out_dir();
  std::cout << "summary: " << (out / "summary.csv").string() << '\n';
  if (s.failed() > 0) {
    std::cerr << s.failed() << " of " << s.runs.size() << " runs failed; see "
              << (out / "failures.csv").string() << '\n';
    return kPartial;
  }
  return kOk;
}

// Recomputes ACC/BWT/FWT from every accuracy_matrix.csv under `dir` and
// checks them against the metrics.csv written next to it.
int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<fs::path> found;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "accuracy_matrix.csv") found.push_back(e.path());
  }
  std::sort(found.begin(), found.end());
  if (found.empty()) throw IoError("no accuracy_matrix.csv under '" + dir + "'");
  std::cout << "# " << metrics::kFwtConvention << '\n';
  std::cout << "run,acc,bwt,fwt,matches_metrics_csv\n";
  bool all_match = true;
  for (const auto& p : found) {
    std::string acc, bwt, fwt, match = "n/a";
    try {
      const auto m = sweep::recompute(p);
      acc = metrics::format_double(m.acc);
      bwt = metrics::detail::opt_str(m.bwt);
      fwt = metrics::detail::opt_str(m.fwt);
      std::ifstream mc(p.parent_path() / "metrics.csv");
      std::string line;
      while (mc && std::getline(mc, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("seed,", 0) == 0) continue;
        const auto cells = config::detail::split(line, ',');
        const bool same = cells.size() == 4 && cells[1] == acc && cells[2] == bwt && cells[3] == fwt;
        match = same ? "yes" : "no";
        all_match = all_match && same;
        break;
      }
    } catch (const MetricError& e) {
      match = std::string("incomplete: ") + e.what();
    }
    std::cout << fs::relative(p.parent_path(), dir).string() << ',' << acc << ',' << bwt << ',' << fwt << ','
              << match << '\n';
  }
  return all_match ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual learning with dynamic sparse training"};
  app.require_subcommand(1);
  Flags f;
  auto* run = app.add_subcommand("run", "train every sweep cell x seed and write reports");
  add_config_flags(run, f);
  run->add_option("-j,--jobs", f.jobs, "runs trained in parallel")->check(CLI::PositiveNumber);
  run->add_flag("--overwrite", f.overwrite, "replace an existing output directory from an earlier sweep");
  run->add_flag("--resume", f.resume, "continue interrupted runs from their checkpoints");
  run->add_flag("--dry-run", f.dry_run, "print the cell list and exit");
  auto* dry = app.add_subcommand("dry-run", "print the cell list and run count");
  add_config_flags(dry, f);
  std::string report_dir;
  auto* rep = app.add_subcommand("report", "recompute metrics from accuracy_matrix.csv files");
  rep->add_option("dir", report_dir, "sweep or run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    if (*dry) {
      f.dry_run = true;
      return cmd_run(f);
    }
    if (*rep) return cmd_report(report_dir);
    return cmd_run(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
