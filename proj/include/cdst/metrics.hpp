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
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdst/errors.hpp"

namespace cdst::metrics {

/// Written into every report header next to the FWT column.
inline constexpr const char* kFwtConvention =
    "FWT = mean over task pairs i<j of A[i][j] (subnetwork of tasks 1..i evaluated on task j with task j's head), "
    "normalised by T(T-1)/2";

inline constexpr const char* kMatrixConvention =
    "A[t][i] for i<=t: accuracy on task i after learning task t (own subnetwork); "
    "A[i][j] for j>i: subnetwork of tasks 1..i on task j";

/// 17 significant digits; parses back to the identical double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// T x T accuracies, row = mask context (tasks learned), column = evaluated
/// task. Indices are 0-based.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t tasks) : n_(tasks), cells_(tasks * tasks) {}

  std::size_t tasks() const noexcept { return n_; }

  void set(std::size_t row, std::size_t col, double acc) {
    if (!(acc >= 0.0 && acc <= 1.0)) throw InputError("accuracy outside [0,1]: " + format_double(acc));
    cells_.at(row * n_ + col) = acc;
  }

  std::optional<double> get(std::size_t row, std::size_t col) const { return cells_.at(row * n_ + col); }
  bool has(std::size_t row, std::size_t col) const { return get(row, col).has_value(); }

  double at(std::size_t row, std::size_t col) const {
    const auto v = get(row, col);
    if (!v) {
      throw MetricError("accuracy matrix cell A[" + std::to_string(row + 1) + "][" + std::to_string(col + 1) +
                        "] is missing");
    }
    return *v;
  }

  friend bool operator==(const AccuracyMatrix&, const AccuracyMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::optional<double>> cells_;
};

/// Mean of the last row.
inline double compute_acc(const AccuracyMatrix& a) {
  const std::size_t T = a.tasks();
  if (T == 0) throw MetricError("empty accuracy matrix");
  double sum = 0.0;
  for (std::size_t i = 0; i < T; ++i) sum += a.at(T - 1, i);
  return sum / double(T);
}

/// Mean change of each earlier task from just-learned to final; absent for T = 1.
inline std::optional<double> compute_bwt(const AccuracyMatrix& a) {
  const std::size_t T = a.tasks();
  if (T < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < T; ++i) sum += a.at(T - 1, i) - a.at(i, i);
  return sum / double(T - 1);
}

/// Mean of the strict upper triangle; absent for T = 1.
inline std::optional<double> compute_fwt(const AccuracyMatrix& a) {
  const std::size_t T = a.tasks();
  if (T < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = i + 1; j < T; ++j) sum += a.at(i, j);
  }
  return sum / (double(T) * double(T - 1) / 2.0);
}

struct Metrics {
  double acc = 0.0;
  std::optional<double> bwt;
  std::optional<double> fwt;
};

inline Metrics compute_all(const AccuracyMatrix& a) { return {compute_acc(a), compute_bwt(a), compute_fwt(a)}; }

/// Header row `,task1,...` then one row per context; absent cells are blank.
inline void write_matrix_csv(const AccuracyMatrix& a, std::ostream& os) {
  os << "# " << kMatrixConvention << '\n';
  os << "row";
  for (std::size_t j = 0; j < a.tasks(); ++j) os << ",task" << (j + 1);
  os << '\n';
  for (std::size_t i = 0; i < a.tasks(); ++i) {
    os << (i + 1);
    for (std::size_t j = 0; j < a.tasks(); ++j) {
      os << ',';
      if (auto v = a.get(i, j)) os << format_double(*v);
    }
    os << '\n';
  }
}

inline AccuracyMatrix read_matrix_csv(std::istream& is) {
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  const std::size_t T = rows.size();
  AccuracyMatrix a(T);
  for (std::size_t i = 0; i < T; ++i) {
    if (rows[i].size() != T + 1) throw InputError("accuracy matrix row " + std::to_string(i + 1) + " has wrong width");
    for (std::size_t j = 0; j < T; ++j) {
      const auto& c = rows[i][j + 1];
      if (!c.empty()) a.set(i, j, std::stod(c));
    }
  }
  return a;
}

/// Incremental accuracy: mean of row t over tasks 1..t, per t.
inline std::vector<double> incremental_accuracy(const AccuracyMatrix& a) {
  std::vector<double> out;
  for (std::size_t t = 0; t < a.tasks(); ++t) {
    if (!a.has(t, t)) break;
    double sum = 0.0;
    for (std::size_t i = 0; i <= t; ++i) sum += a.at(t, i);
    out.push_back(sum / double(t + 1));
  }
  return out;
}

struct SeedMetrics {
  std::string label;  // usually the seed
  Metrics metrics;
};

namespace detail {

inline void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = xs.size() > 1 ? std::sqrt(ss / double(xs.size() - 1)) : 0.0;
}

inline std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace detail

/// One row per seed, then `mean` and `std` (sample) rows. Absent metrics are
/// blank; a column whose values are absent for any seed is blank in the
/// aggregate rows too.
inline void write_metrics_csv(const std::vector<SeedMetrics>& rows, std::ostream& os) {
  os << "# " << kFwtConvention << '\n';
  os << "# BWT and FWT are blank when undefined (single task)\n";
  os << "seed,acc,bwt,fwt\n";
  for (const auto& r : rows) {
    os << r.label << ',' << format_double(r.metrics.acc) << ',' << detail::opt_str(r.metrics.bwt) << ','
       << detail::opt_str(r.metrics.fwt) << '\n';
  }
  if (rows.empty()) return;
  std::vector<double> acc, bwt, fwt;
  bool has_bwt = true, has_fwt = true;
  for (const auto& r : rows) {
    acc.push_back(r.metrics.acc);
    if (r.metrics.bwt) bwt.push_back(*r.metrics.bwt); else has_bwt = false;
    if (r.metrics.fwt) fwt.push_back(*r.metrics.fwt); else has_fwt = false;
  }
  double am, as, bm = 0, bs = 0, fm = 0, fs = 0;
  detail::mean_std(acc, am, as);
  if (has_bwt) detail::mean_std(bwt, bm, bs);
  if (has_fwt) detail::mean_std(fwt, fm, fs);
  os << "mean," << format_double(am) << ',' << (has_bwt ? format_double(bm) : "") << ','
     << (has_fwt ? format_double(fm) : "") << '\n';
  os << "std," << format_double(as) << ',' << (has_bwt ? format_double(bs) : "") << ','
     << (has_fwt ? format_double(fs) : "") << '\n';
}

inline void write_plot_data(const AccuracyMatrix& a, std::ostream& os) {
  os << "tasks_learned,mean_accuracy\n";
  const auto inc = incremental_accuracy(a);
  for (std::size_t t = 0; t < inc.size(); ++t) os << (t + 1) << ',' << format_double(inc[t]) << '\n';
}

}  // namespace cdst::metrics
