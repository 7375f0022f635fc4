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
#include <cstring>
#include <limits>
#include <span>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cdst/errors.hpp"
#include "cdst/tensor.hpp"

namespace cdst::data {

/// Labelled samples; features are (N, ...) with the batch extent first.
struct Dataset {
  Tensor features;
  std::vector<int> labels;
  std::size_t classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  Shape sample_shape() const { return Shape(features.shape().begin() + 1, features.shape().end()); }

  void validate() const {
    if (labels.empty()) throw InputError("dataset is empty");
    if (features.rank() < 2 || features.dim(0) != labels.size()) {
      throw DimensionError("dataset features " + shape_str(features.shape()) + " do not match " +
                           std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
      if (y < 0 || std::size_t(y) >= classes) throw InputError("label " + std::to_string(y) + " outside class universe");
    }
  }

  /// Rows `idx` gathered into a new batch.
  Tensor gather(std::span<const std::size_t> idx) const {
    const std::size_t per = features.size() / features.dim(0);
    Shape s = features.shape();
    s[0] = idx.size();
    Tensor out(s);
    for (std::size_t r = 0; r < idx.size(); ++r) std::copy_n(features.data() + idx[r] * per, per, out.data() + r * per);
    return out;
  }

  Dataset subset(std::span<const std::size_t> idx) const {
    Dataset d;
    d.features = gather(idx);
    d.classes = classes;
    for (auto i : idx) d.labels.push_back(labels[i]);
    return d;
  }
};

/// One task: its global class ids and train/test data with labels remapped
/// to positions in `classes`.
struct TaskSpec {
  std::size_t task_id = 0;
  std::vector<int> classes;
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;

  int global_label(int local) const { return classes.at(std::size_t(local)); }
};

struct TaskSplit {
  std::vector<TaskSpec> tasks;
  std::size_t classes_per_task = 0;
};

namespace detail {

/// Test share of a class of n samples: round(0.2 n), at least one when n >= 2.
inline std::size_t test_count(std::size_t n, double test_fraction) {
  if (n < 2) return 0;
  const auto k = static_cast<std::size_t>(std::floor(test_fraction * double(n) + 0.5));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

/// Stratified split of `ds` restricted to `classes` (global ids). Within
/// each class the trailing samples, in dataset order, go to test. A
/// single-sample class appears in both halves.
inline std::pair<Dataset, Dataset> split_task(const Dataset& ds, const std::vector<int>& classes, double test_fraction) {
  std::vector<std::size_t> train_idx, test_idx;
  std::vector<int> train_y, test_y;
  for (std::size_t local = 0; local < classes.size(); ++local) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == classes[local]) rows.push_back(i);
    }
    const std::size_t nt = test_count(rows.size(), test_fraction);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r < rows.size() - nt || rows.size() == 1) {
        train_idx.push_back(rows[r]);
        train_y.push_back(int(local));
      }
      if (r >= rows.size() - nt || rows.size() == 1) {
        test_idx.push_back(rows[r]);
        test_y.push_back(int(local));
      }
    }
  }
  Dataset tr{ds.gather(train_idx), std::move(train_y), classes.size()};
  Dataset te{ds.gather(test_idx), std::move(test_y), classes.size()};
  return {std::move(tr), std::move(te)};
}

}  // namespace detail

/// Well-separated Gaussian class clusters. Each class mean is a random
/// direction scaled to `separation`; samples add unit-variance noise.
inline TaskSplit make_synthetic_tasks(std::size_t n_tasks, std::size_t classes_per_task, std::size_t dim,
                                      std::size_t samples_per_class, double separation, std::uint64_t seed) {
  if (n_tasks == 0 || classes_per_task == 0 || dim == 0 || samples_per_class == 0) {
    throw ConfigError("synthetic task counts must all be >= 1");
  }
  if (!(separation > 0.0)) throw ConfigError("synthetic separation must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n_classes = n_tasks * classes_per_task;

  std::vector<std::vector<double>> means(n_classes, std::vector<double>(dim));
  for (auto& m : means) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : m) {
        v = gauss(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : m) v *= separation / norm;
  }

  Dataset all;
  all.classes = n_classes;
  all.features = Tensor({n_classes * samples_per_class, dim});
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < samples_per_class; ++s, ++row) {
      for (std::size_t d = 0; d < dim; ++d) all.features[row * dim + d] = means[c][d] + gauss(rng);
      all.labels.push_back(int(c));
    }
  }

  TaskSplit split;
  split.classes_per_task = classes_per_task;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    TaskSpec task;
    task.task_id = t;
    for (std::size_t k = 0; k < classes_per_task; ++k) task.classes.push_back(int(t * classes_per_task + k));
    auto [tr, te] = detail::split_task(all, task.classes, 0.2);
    task.train = std::make_shared<const Dataset>(std::move(tr));
    task.test = std::make_shared<const Dataset>(std::move(te));
    split.tasks.push_back(std::move(task));
  }
  return split;
}

/// Permutation of the class universe used to carve tasks.
struct ClassOrder {
  std::vector<int> permutation;

  static ClassOrder identity(std::size_t n) {
    ClassOrder o;
    o.permutation.resize(n);
    std::iota(o.permutation.begin(), o.permutation.end(), 0);
    return o;
  }

  static ClassOrder shuffled(std::size_t n, std::uint64_t seed) {
    ClassOrder o = identity(n);
    std::mt19937_64 rng(seed);
    std::shuffle(o.permutation.begin(), o.permutation.end(), rng);
    return o;
  }
};

/// Contiguous blocks of `order` become tasks; each task gets a stratified
/// train/test split of `dataset` with labels remapped to block positions.
inline TaskSplit split_by_classes(const Dataset& dataset, std::size_t n_tasks, const ClassOrder& order,
                                  double test_fraction = 0.2) {
  dataset.validate();
  if (n_tasks == 0 || dataset.classes % n_tasks != 0) {
    throw ConfigError(std::to_string(dataset.classes) + " classes cannot be split evenly into " +
                      std::to_string(n_tasks) + " tasks");
  }
  std::vector<int> sorted = order.permutation;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != dataset.classes || sorted[i] != int(i)) {
      throw ConfigError("class order is not a permutation of the " + std::to_string(dataset.classes) + " classes");
    }
  }
  TaskSplit split;
  split.classes_per_task = dataset.classes / n_tasks;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    TaskSpec task;
    task.task_id = t;
    task.classes.assign(order.permutation.begin() + std::ptrdiff_t(t * split.classes_per_task),
                        order.permutation.begin() + std::ptrdiff_t((t + 1) * split.classes_per_task));
    auto [tr, te] = detail::split_task(dataset, task.classes, test_fraction);
    if (tr.size() == 0) throw InputError("task " + std::to_string(t + 1) + " has no samples");
    task.train = std::make_shared<const Dataset>(std::move(tr));
    task.test = std::make_shared<const Dataset>(std::move(te));
    split.tasks.push_back(std::move(task));
  }
  return split;
}

/// File layout accepted by load_raw_dataset.
///
/// flat_binary: features file = "CDSF", u32 version (1), u32 dtype
/// (0 = u8, 1 = f32, 2 = f64), u32 rank (2 or 4), u64 extents[rank], then
/// row-major values. Labels file = "CDSL", u32 version (1), u64 N, then N
/// u32 labels. All integers little-endian. u8 features are scaled to [0, 1].
///
/// csv: one sample per line, numeric features followed by an integer label.
struct RawFormat {
  enum class Kind { flat_binary, csv } kind = Kind::flat_binary;
  std::string labels_path;           // flat_binary only
  bool csv_header = false;           // first line is a header and is skipped
  Shape csv_sample_shape;            // optional per-sample shape for CSV features
  std::optional<std::size_t> classes;  // class universe; defaults to max label + 1
};

namespace detail {

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Little-endian cursor over a byte buffer with offset-aware errors.
class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& buf, std::string name) : buf_(buf), name_(std::move(name)) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > buf_.size()) {
      throw IngestError(name_ + ": truncated while reading " + what + " at byte offset " + std::to_string(pos_) +
                        ": expected " + std::to_string(pos_ + n) + " bytes, file has " + std::to_string(buf_.size()));
    }
  }

  std::uint64_t uint(std::size_t width, const char* what) {
    need(width, what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= std::uint64_t(buf_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }

  void magic(const char* m) {
    need(4, "magic");
    if (std::memcmp(buf_.data() + pos_, m, 4) != 0) {
      throw IngestError(name_ + ": bad magic at byte offset " + std::to_string(pos_) + " (expected '" + m + "')");
    }
    pos_ += 4;
  }

  std::size_t pos() const noexcept { return pos_; }
  const unsigned char* here() const noexcept { return buf_.data() + pos_; }
  void skip(std::size_t n) { pos_ += n; }
  std::size_t size() const noexcept { return buf_.size(); }

 private:
  const std::vector<unsigned char>& buf_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline Dataset load_flat_binary(const std::string& path, const RawFormat& fmt) {
  const auto fbuf = read_file(path);
  ByteReader fr(fbuf, path);
  fr.magic("CDSF");
  const auto version = fr.uint(4, "version");
  if (version != 1) throw IngestError(path + ": unsupported version " + std::to_string(version) + " at byte offset 4");
  const auto dtype = fr.uint(4, "dtype");
  if (dtype > 2) throw IngestError(path + ": unknown dtype " + std::to_string(dtype) + " at byte offset 8");
  const auto rank = fr.uint(4, "rank");
  if (rank != 2 && rank != 4) throw IngestError(path + ": rank must be 2 or 4, got " + std::to_string(rank) + " at byte offset 12");
  Shape shape;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const auto e = fr.uint(8, "extent");
    if (e == 0) throw IngestError(path + ": zero extent at byte offset " + std::to_string(fr.pos() - 8));
    shape.push_back(std::size_t(e));
  }
  const std::size_t width = dtype == 0 ? 1 : dtype == 1 ? 4 : 8;
  const std::size_t count = shape_size(shape);
  const std::size_t expected = fr.pos() + count * width;
  if (fbuf.size() != expected) {
    throw IngestError(path + ": expected " + std::to_string(expected) + " bytes for shape " + shape_str(shape) +
                      ", file has " + std::to_string(fbuf.size()));
  }
  Tensor features(shape);
  const unsigned char* p = fr.here();
  for (std::size_t i = 0; i < count; ++i) {
    if (dtype == 0) {
      features[i] = double(p[i]) / 255.0;
    } else if (dtype == 1) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t(p[i * 4 + b]) << (8 * b);
      float f;
      std::memcpy(&f, &bits, 4);
      features[i] = double(f);
    } else {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t(p[i * 8 + b]) << (8 * b);
      double d;
      std::memcpy(&d, &bits, 8);
      features[i] = d;
    }
  }

  if (fmt.labels_path.empty()) throw IngestError(path + ": flat binary features need a labels file");
  const auto lbuf = read_file(fmt.labels_path);
  ByteReader lr(lbuf, fmt.labels_path);
  lr.magic("CDSL");
  const auto lversion = lr.uint(4, "version");
  if (lversion != 1) throw IngestError(fmt.labels_path + ": unsupported version at byte offset 4");
  const auto n = lr.uint(8, "count");
  if (n != shape[0]) {
    throw IngestError(fmt.labels_path + ": label count " + std::to_string(n) + " at byte offset 8 does not match " +
                      std::to_string(shape[0]) + " samples");
  }
  const std::size_t lexpected = lr.pos() + std::size_t(n) * 4;
  if (lbuf.size() != lexpected) {
    throw IngestError(fmt.labels_path + ": expected " + std::to_string(lexpected) + " bytes, file has " +
                      std::to_string(lbuf.size()));
  }
  Dataset ds;
  ds.features = std::move(features);
  int max_label = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto y = lr.uint(4, "label");
    if (y > std::uint64_t(std::numeric_limits<int>::max())) {
      throw IngestError(fmt.labels_path + ": label too large at byte offset " + std::to_string(lr.pos() - 4));
    }
    ds.labels.push_back(int(y));
    max_label = std::max(max_label, int(y));
  }
  ds.classes = fmt.classes.value_or(std::size_t(max_label) + 1);
  ds.validate();
  return ds;
}

inline Dataset load_csv(const std::string& path, const RawFormat& fmt) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<double> values;
  Dataset ds;
  int max_label = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && fmt.csv_header) continue;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw IngestError(path + ": line " + std::to_string(line_no) + ": need features and a label");
    if (width == 0) width = cells.size() - 1;
    if (cells.size() - 1 != width) {
      throw IngestError(path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " features, got " + std::to_string(cells.size() - 1));
    }
    for (std::size_t c = 0; c < width; ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size() || !std::isfinite(v)) {
        throw IngestError(path + ": line " + std::to_string(line_no) + ": column " + std::to_string(c + 1) +
                          " is not a number: '" + cells[c] + "'");
      }
      values.push_back(v);
    }
    const std::string& lab = cells.back();
    std::size_t used = 0;
    long y = -1;
    try {
      y = std::stol(lab, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != lab.size() || y < 0 || y > std::numeric_limits<int>::max()) {
      throw IngestError(path + ": line " + std::to_string(line_no) + ": label is not a non-negative integer: '" + lab +
                        "'");
    }
    ds.labels.push_back(int(y));
    max_label = std::max(max_label, int(y));
  }
  if (ds.labels.empty()) throw IngestError(path + ": no samples");
  Shape shape{ds.labels.size()};
  if (fmt.csv_sample_shape.empty()) {
    shape.push_back(width);
  } else {
    if (shape_size(fmt.csv_sample_shape) != width) {
      throw IngestError(path + ": declared sample shape " + shape_str(fmt.csv_sample_shape) + " does not hold " +
                        std::to_string(width) + " features");
    }
    shape.insert(shape.end(), fmt.csv_sample_shape.begin(), fmt.csv_sample_shape.end());
  }
  ds.features = Tensor(shape, std::move(values));
  ds.classes = fmt.classes.value_or(std::size_t(max_label) + 1);
  ds.validate();
  return ds;
}

}  // namespace detail

inline Dataset load_raw_dataset(const std::string& path, const RawFormat& fmt) {
  return fmt.kind == RawFormat::Kind::csv ? detail::load_csv(path, fmt) : detail::load_flat_binary(path, fmt);
}

/// Writes `ds` in the flat-binary layout (f64 features).
inline void write_flat_binary(const Dataset& ds, const std::string& features_path, const std::string& labels_path) {
  const auto put = [](std::ostream& os, std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) os.put(char((v >> (8 * i)) & 0xff));
  };
  std::ofstream f(features_path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + features_path + "'");
  f.write("CDSF", 4);
  put(f, 1, 4);
  put(f, 2, 4);
  put(f, ds.features.rank(), 4);
  for (auto e : ds.features.shape()) put(f, e, 8);
  for (double v : ds.features.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put(f, bits, 8);
  }
  std::ofstream l(labels_path, std::ios::binary);
  if (!l) throw IoError("cannot write '" + labels_path + "'");
  l.write("CDSL", 4);
  put(l, 1, 4);
  put(l, ds.labels.size(), 8);
  for (int y : ds.labels) put(l, std::uint64_t(y), 4);
}

}  // namespace cdst::data
