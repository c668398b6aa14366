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

#include <span>
#include <vector>

#include <Eigen/Core>

#include "instreg/geometry.hpp"

namespace instreg {

inline constexpr int kBackgroundLabel = -1;

/// Points with optional per-point instance labels (-1 background, k >= 1 instance k).
struct PointCloud {
  Points points;
  std::vector<int> labels;  // empty when unlabeled

  bool has_labels() const { return !labels.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Superpoints with their dense patches, kNN tables and geodesic distances.
///
/// `knn(i, 0) == i` for every anchor; remaining slots are sorted by
/// ascending Euclidean distance, ties by ascending index.
/// `geodesic(i, j)` is the shortest-path length from superpoint i to its
/// j-th neighbor over the symmetrized graph joining every superpoint to its
/// first `edge_k - 1` non-self neighbors.
struct SuperpointGraph {
  Points superpoints;
  std::vector<std::vector<int>> patch_of;
  Eigen::MatrixXi knn;
  Eigen::MatrixXd geodesic;

  int size() const { return static_cast<int>(superpoints.size()); }
  int k() const { return static_cast<int>(knn.cols()); }
  int neighbor(int anchor, int slot) const { return knn(anchor, slot); }
};

/// One output point per occupied voxel, placed at the member centroid.
/// Output order follows the first occurrence of each voxel in the input.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Level 0 uses `base_voxel`; level s downsamples level s-1 with base_voxel * 2^s.
std::vector<PointCloud> build_pyramid(const PointCloud& cloud, double base_voxel, int stages);

/// Nearest-superpoint partition of the dense points (ties to the lower index).
std::vector<std::vector<int>> point_to_node(std::span<const Point3> dense, std::span<const Point3> superpoints);

/// Slot 0 is the anchor itself.
Eigen::MatrixXi knn_table(std::span<const Point3> superpoints, int k);

/// Shortest paths from `graph.superpoints` along edges taken from slots
/// 1 .. edge_k - 1 of `graph.knn`; `edge_k` is clamped to [2, k]. Pairs the
/// edges cannot connect get 10 times the longest edge.
Eigen::MatrixXd geodesic_table(const SuperpointGraph& graph, int edge_k);

SuperpointGraph build_superpoint_graph(std::span<const Point3> dense, std::span<const Point3> superpoints, int k,
                                       int edge_k);

/// Dense level, coarsest level and the superpoint graph joining them.
struct PreparedCloud {
  PointCloud dense;
  PointCloud coarse;
  SuperpointGraph graph;
};

/// Pyramid + partition + kNN + geodesics. `k` is clamped to the superpoint count.
PreparedCloud prepare_cloud(const PointCloud& cloud, double base_voxel, int stages, int k, int edge_k);

/// Majority instance label of each superpoint's patch (background when the patch is empty).
std::vector<int> superpoint_labels(const SuperpointGraph& graph, std::span<const int> dense_labels);

}  // namespace instreg
