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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cdst/config.hpp"
#include "cdst/sweep.hpp"

namespace cdst {
namespace {

namespace fs = std::filesystem;
using config::ExperimentConfig;

ExperimentConfig parse(const std::string& text, const std::vector<std::pair<std::string, std::string>>& ov = {}) {
  std::istringstream is(text);
  return config::parse_config(is, "test.cfg", ov);
}

std::string echo(const ExperimentConfig& c) {
  std::ostringstream os;
  config::write_config_echo(c, os);
  return os.str();
}

TEST(ParseConfig, EmptyFileGivesTrainingDefaults) {
  const auto c = parse("");
  EXPECT_EQ(c.train.batch_size, 128u);
  EXPECT_EQ(c.train.lr, 0.001);
  EXPECT_EQ(c.train.lr_factor, 0.1);
  EXPECT_EQ(c.train.lr_milestones, (std::vector<double>{0.5, 0.75}));
  EXPECT_EQ(c.train.alpha, 0.5);
  EXPECT_EQ(c.train.epochs, 100u);
  EXPECT_EQ(c.sweep.seeds.size(), 3u);
  const std::string e = echo(c);
  EXPECT_NE(e.find("train.batch_size = 128\n"), std::string::npos);
  EXPECT_NE(e.find("train.lr = 0.001\n"), std::string::npos);
  EXPECT_NE(e.find("dst.adaptive_policy = 1-5:random,6-10:gradient\n"), std::string::npos);
}

TEST(ParseConfig, FlagOverridesFile) {
  const auto c = parse("sweep.sparsity = 0.8\n", {{"sweep.sparsity", "0.9"}});
  EXPECT_EQ(c.sweep.sparsity, (std::vector<double>{0.9}));
}

TEST(ParseConfig, Errors) {
  const auto message = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("train.epohcs = 3\n").find("'train.epohcs'"), std::string::npos);
  EXPECT_NE(message("train.epochs = three\n").find("'train.epochs'"), std::string::npos);
  EXPECT_NE(message("# c\n\njust words\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("train.lr = 1\ntrain.lr = 2\n").find("repeats line 1"), std::string::npos);
  EXPECT_NE(message("sweep.growth = sideways\n").find("'sweep.growth'"), std::string::npos);
  EXPECT_NE(message("sweep.seeds =\n").find("'sweep.seeds'"), std::string::npos);
  EXPECT_NE(message("data.tasks = 12\nsweep.growth = adaptive\n").find("'dst.adaptive_policy'"), std::string::npos);
  EXPECT_EQ(message("data.tasks = 12\nsweep.growth = gradient\n"), "no error");
  EXPECT_NE(message("sweep.sparsity = 1.0\n").find("sweep"), std::string::npos);
  EXPECT_NE(message("model.layers = affine:8,conv:4:3\n").find("model.layers"), std::string::npos);
}

TEST(ParseConfig, EchoRoundTrip) {
  const auto c = parse(
      "sweep.sparsity = 0.7,0.99\nsweep.init = erk,uniform\nsweep.growth = momentum,adaptive\n"
      "dst.t_end = 40\ndst.unfired_scope = run\ntrain.lr = 0.1\ndata.sample_shape = 1,4,4\n");
  const std::string e = echo(c);
  const auto back = parse(e);
  EXPECT_EQ(echo(back), e);
  EXPECT_EQ(back.train.t_end, std::optional<std::size_t>(40));
  EXPECT_EQ(back.sweep.init.front(), sparse::InitStrategy::erk);
}

TEST(ConfigEchoProperty, RoundTripRandomValues) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string text = "train.lr = " + metrics::format_double(u(rng) * 1e-2) +
                             "\nsweep.sparsity = " + metrics::format_double(u(rng)) + "," +
                             metrics::format_double(u(rng)) + "\ndst.alpha = " + metrics::format_double(u(rng)) +
                             "\ndata.separation = " + metrics::format_double(u(rng) * 20) + "\n";
    const auto a = parse(text);
    const auto b = parse(echo(a));
    ASSERT_EQ(a.train.lr, b.train.lr);
    ASSERT_EQ(a.sweep.sparsity, b.sweep.sparsity);
    ASSERT_EQ(a.train.alpha, b.train.alpha);
    ASSERT_EQ(a.data.separation, b.data.separation);
  }
}

TEST(Cells, CrossProduct) {
  const auto c = parse("sweep.sparsity = 0.8,0.9\nsweep.growth = random,gradient\nsweep.seeds = 1,2,3\n");
  const auto cells = c.cells();
  EXPECT_EQ(cells.size(), 4u);
  std::set<std::string> names;
  for (const auto& cell : cells) names.insert(cell.name());
  EXPECT_EQ(names.size(), 4u);
  EXPECT_TRUE(names.count("S0.9-uniform-gradient-dt100"));
  std::ostringstream os;
  sweep::describe(c, os);
  EXPECT_NE(os.str().find("runs: 4 cells x 3 seeds = 12"), std::string::npos) << os.str();

  const auto tc = c.train_config(cells[1], 7);
  EXPECT_EQ(tc.seed, 7u);
  EXPECT_EQ(tc.sparsity, 0.8);
  EXPECT_EQ(tc.growth.for_task(3), dst::Growth::gradient);
  const auto adaptive = parse("sweep.growth = adaptive\n");
  const auto ta = adaptive.train_config(adaptive.cells()[0], 1);
  EXPECT_EQ(ta.growth.for_task(5), dst::Growth::random);
  EXPECT_EQ(ta.growth.for_task(6), dst::Growth::gradient);
}

TEST(BuildModel, LayerStrings) {
  const auto m = config::build_model("conv:4:3:1:1,relu,conv:8:3:2,relu,flatten,affine:16,relu", {3, 8, 8}, 2, 5);
  ASSERT_EQ(m.layers.size(), 7u);
  const auto& c2 = std::get<nn::Conv2d>(m.layers[2]);
  EXPECT_EQ(c2.c_in, 4u);
  EXPECT_EQ(c2.stride, 2u);
  EXPECT_EQ(std::get<nn::Affine>(m.layers[5]).n_in, 8u * 3 * 3);
  EXPECT_EQ(m.feature_dim(), 16u);
  EXPECT_THROW(config::build_model("conv:4:3", {3, 8, 8}, 1, 2), ConfigError);
  EXPECT_THROW(config::build_model("affine:4,tanh", {3}, 1, 2), ConfigError);
  EXPECT_THROW(config::build_model("affine:4", {3, 8, 8}, 1, 2), ConfigError);
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cdst_config_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig tiny(const fs::path& out) {
  return parse("data.tasks = 2\ndata.classes_per_task = 2\ndata.dim = 4\ndata.samples_per_class = 10\n"
               "model.layers = affine:8,relu\ntrain.epochs = 2\ntrain.batch_size = 8\nsweep.delta_t = 2\n"
               "sweep.sparsity = 0.5,0.8\nsweep.growth = random,momentum\nsweep.seeds = 1,2\noutput.dir = " +
               out.string() + "\n");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Sweep, LayoutRefusalAndParallelDeterminism) {
  const auto out = fresh_dir("layout");
  const auto cfg = tiny(out);
  const auto s = sweep::run_sweep(cfg);
  EXPECT_EQ(s.runs.size(), 8u);
  EXPECT_EQ(s.failed(), 0u);
  std::size_t run_dirs = 0;
  for (const auto& cell : cfg.cells()) {
    EXPECT_TRUE(fs::exists(sweep::cell_dir(out, cell) / "metrics.csv"));
    for (auto seed : cfg.sweep.seeds) run_dirs += fs::exists(sweep::run_dir(out, cell, seed) / "accuracy_matrix.csv");
  }
  EXPECT_EQ(run_dirs, 8u);
  EXPECT_TRUE(fs::exists(out / "summary.csv"));
  EXPECT_FALSE(fs::exists(out / "failures.csv"));
  EXPECT_THROW(sweep::run_sweep(cfg), IoError);

  const auto cell = cfg.cells()[3];
  const std::string matrix = slurp(sweep::run_dir(out, cell, 2) / "accuracy_matrix.csv");
  const auto par_out = fresh_dir("parallel");
  auto par = cfg;
  par.out_dir = par_out.string();
  sweep::Options opt;
  opt.jobs = 4;
  sweep::run_sweep(par, opt);
  EXPECT_EQ(slurp(sweep::run_dir(par_out, cell, 2) / "accuracy_matrix.csv"), matrix);

  opt.overwrite = true;
  opt.jobs = 1;
  sweep::run_sweep(par, opt);
  EXPECT_EQ(slurp(sweep::run_dir(par_out, cell, 2) / "accuracy_matrix.csv"), matrix);
}

TEST(Sweep, OverwriteRefusesForeignDirectory) {
  const auto out = fresh_dir("foreign");
  fs::create_directories(out);
  std::ofstream(out / "notes.txt") << "keep me";
  sweep::Options opt;
  opt.overwrite = true;
  EXPECT_THROW(sweep::run_sweep(tiny(out), opt), IoError);
  EXPECT_TRUE(fs::exists(out / "notes.txt"));
}

TEST(Sweep, FailureIsolated) {
  const auto out = fresh_dir("failure");
  const auto cfg = tiny(out);
  sweep::Options opt;
  opt.jobs = 2;
  opt.before_run = [](const config::Cell& c, std::uint64_t seed) {
    if (c.growth == "momentum" && c.sparsity == 0.8 && seed == 1) throw std::runtime_error("injected");
  };
  const auto s = sweep::run_sweep(cfg, opt);
  EXPECT_EQ(s.failed(), 1u);
  const std::string manifest = slurp(out / "failures.csv");
  EXPECT_NE(manifest.find("S0.8-uniform-momentum-dt2,1,\"injected\""), std::string::npos) << manifest;

  const auto ref = fresh_dir("failure_ref");
  auto clean = cfg;
  clean.out_dir = ref.string();
  sweep::run_sweep(clean);
  for (const auto& cell : cfg.cells()) {
    for (auto seed : cfg.sweep.seeds) {
      const auto p = sweep::run_dir(out, cell, seed) / "accuracy_matrix.csv";
      if (cell.growth == "momentum" && cell.sparsity == 0.8 && seed == 1) {
        EXPECT_FALSE(fs::exists(p));
        continue;
      }
      EXPECT_EQ(slurp(p), slurp(sweep::run_dir(ref, cell, seed) / "accuracy_matrix.csv"));
    }
  }
}

TEST(Sweep, ResumeKeepsFinishedRuns) {
  const auto out = fresh_dir("resume");
  const auto cfg = tiny(out);
  sweep::run_sweep(cfg);
  const auto cell = cfg.cells()[0];
  const auto dir = sweep::run_dir(out, cell, 1);
  const std::string matrix = slurp(dir / "accuracy_matrix.csv");
  fs::remove(dir / "metrics.csv");
  sweep::Options opt;
  opt.resume = true;
  const auto s = sweep::run_sweep(cfg, opt);
  EXPECT_EQ(s.failed(), 0u);
  EXPECT_EQ(slurp(dir / "accuracy_matrix.csv"), matrix);
  const auto m = sweep::recompute(dir / "accuracy_matrix.csv");
  EXPECT_EQ(*m.bwt, 0.0);
}

}  // namespace
}  // namespace cdst
