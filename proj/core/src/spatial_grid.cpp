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

#include "instreg/spatial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "instreg/error.hpp"

namespace instreg {

std::size_t PointGrid::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
  h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
  h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
  return static_cast<std::size_t>(h);
}

PointGrid::PointGrid(std::span<const Point3> points, double cell) : points_(points.begin(), points.end()), cell_(cell) {
  if (!(cell > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid cell must be > 0");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Key k = key_of(points_[i]);
    cells_[k].push_back(static_cast<int>(i));
    if (i == 0) {
      lo_ = hi_ = k;
    } else {
      lo_ = {std::min(lo_.x, k.x), std::min(lo_.y, k.y), std::min(lo_.z, k.z)};
      hi_ = {std::max(hi_.x, k.x), std::max(hi_.y, k.y), std::max(hi_.z, k.z)};
    }
  }
}

PointGrid::Key PointGrid::key_of(const Point3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

int PointGrid::nearest(const Point3& q) const {
  if (points_.empty()) return -1;
  const Key c = key_of(q);
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  const std::int64_t max_ring =
      std::max({std::abs(c.x - lo_.x), std::abs(c.x - hi_.x), std::abs(c.y - lo_.y), std::abs(c.y - hi_.y),
                std::abs(c.z - lo_.z), std::abs(c.z - hi_.z)});
  for (std::int64_t r = 0; r <= max_ring; ++r) {
    // Everything outside ring r is at least r * cell away from q.
    if (best >= 0) {
      const double reach = static_cast<double>(r - 1) * cell_;
      if (r > 0 && reach * reach > best_d) break;
    }
    for (std::int64_t dx = -r; dx <= r; ++dx) {
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        for (std::int64_t dz = -r; dz <= r; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (int idx : it->second) {
            const double d = (points_[idx] - q).squaredNorm();
            if (d < best_d || (d == best_d && idx < best)) {
              best_d = d;
              best = idx;
            }
          }
        }
      }
    }
  }
  return best;
}

bool PointGrid::any_within(const Point3& q, double radius) const {
  const Key c = key_of(q);
  const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
  const double r2 = radius * radius;
  for (std::int64_t dx = -reach; dx <= reach; ++dx) {
    for (std::int64_t dy = -reach; dy <= reach; ++dy) {
      for (std::int64_t dz = -reach; dz <= reach; ++dz) {
        const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
        if (it == cells_.end()) continue;
        for (int idx : it->second) {
          if ((points_[idx] - q).squaredNorm() <= r2) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace instreg
