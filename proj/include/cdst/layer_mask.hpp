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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cdst/errors.hpp"

namespace cdst {

/// Boolean membership set over the positions of one parameter tensor.
/// The popcount is cached and kept in sync by set()/reset().
class LayerMask {
 public:
  LayerMask() = default;
  LayerMask(std::size_t layer_id, std::size_t size, bool value = false)
      : layer_id_(layer_id), bits_(size, value ? 1 : 0), count_(value ? size : 0) {}

  static LayerMask full(std::size_t layer_id, std::size_t size) { return {layer_id, size, true}; }

  std::size_t layer_id() const noexcept { return layer_id_; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t active_count() const noexcept { return count_; }

  bool test(std::size_t pos) const noexcept { return bits_[pos] != 0; }

  void set(std::size_t pos) {
    if (!bits_[pos]) {
      bits_[pos] = 1;
      ++count_;
    }
  }

  void reset(std::size_t pos) {
    if (bits_[pos]) {
      bits_[pos] = 0;
      --count_;
    }
  }

  /// Active positions in increasing order.
  std::vector<std::size_t> positions() const {
    std::vector<std::size_t> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i]) out.push_back(i);
    }
    return out;
  }

  std::size_t intersection_count(const LayerMask& other) const {
    check_same_size(other);
    std::size_t n = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) n += (bits_[i] & other.bits_[i]);
    return n;
  }

  LayerMask& operator|=(const LayerMask& other) {
    check_same_size(other);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (other.bits_[i]) set(i);
    }
    return *this;
  }

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const LayerMask& a, const LayerMask& b) {
    return a.layer_id_ == b.layer_id_ && a.bits_ == b.bits_;
  }

 private:
  void check_same_size(const LayerMask& other) const {
    if (other.size() != size()) {
      throw DimensionError("mask size mismatch on layer " + std::to_string(layer_id_) + ": " +
                           std::to_string(size()) + " vs " + std::to_string(other.size()));
    }
  }

  std::size_t layer_id_ = 0;
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

}  // namespace cdst
