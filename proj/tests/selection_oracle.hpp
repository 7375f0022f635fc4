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
#include <vector>

namespace cdst::testing {

/// Full stable sort of candidates by key; returns the first k positions,
/// ascending. `descending` ranks large |score| first.
inline std::vector<std::size_t> brute_force_select(const std::vector<double>& score,
                                                   const std::vector<std::size_t>& candidates, std::size_t k,
                                                   bool descending) {
  std::vector<std::size_t> order = candidates;
  std::sort(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? std::abs(score[a]) > std::abs(score[b]) : std::abs(score[a]) < std::abs(score[b]);
  });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace cdst::testing
