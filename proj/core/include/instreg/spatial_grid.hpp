// Copyright 2026 The instreg Authors
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
#include <span>
#include <unordered_map>
#include <vector>

#include "instreg/geometry.hpp"

namespace instreg {

/// Uniform hash grid over a fixed point set for nearest and radius queries.
class PointGrid {
 public:
  PointGrid(std::span<const Point3> points, double cell);

  /// Index of the closest point (ties to the lower index); -1 when empty.
  int nearest(const Point3& q) const;
  bool any_within(const Point3& q, double radius) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  Key key_of(const Point3& p) const;

  Points points_;
  double cell_;
  std::unordered_map<Key, std::vector<int>, KeyHash> cells_;
  Key lo_{}, hi_{};
};

}  // namespace instreg
