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

#include "instreg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "instreg/error.hpp"

namespace instreg {
namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

struct VoxelAccum {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::size_t count = 0;
  std::map<int, std::size_t> votes;
};

int majority(const std::map<int, std::size_t>& votes) {
  int best = kBackgroundLabel;
  std::size_t best_count = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_count) {  // std::map iterates ascending, so ties keep the smaller label
      best = label;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw Error(ErrorCode::NonPositiveVoxel, "voxel size must be > 0");
  const bool labeled = cloud.has_labels();
  if (labeled && cloud.labels.size() != cloud.points.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels must cover all points");
  }

  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot_of;
  std::vector<VoxelAccum> voxels;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                       static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                       static_cast<std::int64_t>(std::floor(p.z() / voxel))};
    auto [it, inserted] = slot_of.try_emplace(key, voxels.size());
    if (inserted) voxels.emplace_back();
    auto& acc = voxels[it->second];
    acc.sum += p;
    ++acc.count;
    if (labeled) ++acc.votes[cloud.labels[i]];
  }

  PointCloud out;
  out.points.reserve(voxels.size());
  if (labeled) out.labels.reserve(voxels.size());
  for (const auto& acc : voxels) {
    out.points.push_back(acc.sum / static_cast<double>(acc.count));
    if (labeled) out.labels.push_back(majority(acc.votes));
  }
  return out;
}

std::vector<PointCloud> build_pyramid(const PointCloud& cloud, double base_voxel, int stages) {
  if (stages < 2) throw Error(ErrorCode::InvalidArgument, "pyramid needs at least 2 stages");
  std::vector<PointCloud> levels;
  levels.reserve(stages);
  levels.push_back(voxel_downsample(cloud, base_voxel));
  double voxel = base_voxel;
  for (int s = 1; s < stages; ++s) {
    voxel *= 2.0;
    levels.push_back(voxel_downsample(levels.back(), voxel));
  }
  return levels;
}

std::vector<std::vector<int>> point_to_node(std::span<const Point3> dense, std::span<const Point3> superpoints) {
  if (superpoints.empty()) throw Error(ErrorCode::EmptySuperpoints, "cannot partition onto zero superpoints");
  std::vector<std::vector<int>> patches(superpoints.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < superpoints.size(); ++s) {
      const double d = (dense[i] - superpoints[s]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    patches[best].push_back(static_cast<int>(i));
  }
  return patches;
}

Eigen::MatrixXi knn_table(std::span<const Point3> superpoints, int k) {
  const int n = static_cast<int>(superpoints.size());
  if (k < 1 || k > n) throw Error(ErrorCode::KTooLarge, "k must lie in [1, number of superpoints]");
  Eigen::MatrixXi knn(n, k);
  std::vector<std::pair<double, int>> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) order.emplace_back((superpoints[i] - superpoints[j]).squaredNorm(), j);
    }
    std::partial_sort(order.begin(), order.begin() + (k - 1), order.end());
    knn(i, 0) = i;
    for (int s = 1; s < k; ++s) knn(i, s) = order[s - 1].second;
  }
  return knn;
}

Eigen::MatrixXd geodesic_table(const SuperpointGraph& graph, int edge_k) {
  const int n = graph.size();
  const int k = graph.k();
  const int ek = std::clamp(edge_k, std::min(2, k), k);
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  double max_edge = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int s = 1; s < ek; ++s) {
      const int j = graph.knn(i, s);
      const double w = (graph.superpoints[i] - graph.superpoints[j]).norm();
      adj[i].emplace_back(j, w);
      adj[j].emplace_back(i, w);
      max_edge = std::max(max_edge, w);
    }
  }
  const double cap = 10.0 * max_edge;
  const double inf = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd geo(n, k);
  std::vector<double> dist(n, inf);
  std::vector<int> touched;
  using Item = std::pair<double, int>;
  for (int src = 0; src < n; ++src) {
    // Dijkstra, stopped once every kNN target of the anchor is settled.
    std::vector<char> wanted(n, 0);
    int remaining = 0;
    for (int s = 0; s < k; ++s) {
      if (!wanted[graph.knn(src, s)]) {
        wanted[graph.knn(src, s)] = 1;
        ++remaining;
      }
    }
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    touched.push_back(src);
    heap.emplace(0.0, src);
    while (!heap.empty() && remaining > 0) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      if (wanted[u]) {
        wanted[u] = 0;
        --remaining;
      }
      for (const auto& [v, w] : adj[u]) {
        const double nd = d + w;
        if (nd < dist[v]) {
          if (dist[v] == inf) touched.push_back(v);
          dist[v] = nd;
          heap.emplace(nd, v);
        }
      }
    }
    for (int s = 0; s < k; ++s) {
      const double d = dist[graph.knn(src, s)];
      geo(src, s) = std::isfinite(d) ? d : cap;
    }
    for (int v : touched) dist[v] = inf;
    touched.clear();
  }
  return geo;
}

SuperpointGraph build_superpoint_graph(std::span<const Point3> dense, std::span<const Point3> superpoints, int k,
                                       int edge_k) {
  SuperpointGraph g;
  g.superpoints.assign(superpoints.begin(), superpoints.end());
  g.patch_of = point_to_node(dense, superpoints);
  g.knn = knn_table(superpoints, k);
  g.geodesic = geodesic_table(g, edge_k);
  return g;
}

PreparedCloud prepare_cloud(const PointCloud& cloud, double base_voxel, int stages, int k, int edge_k) {
  if (cloud.points.empty()) throw Error(ErrorCode::InvalidArgument, "cannot prepare an empty cloud");
  auto levels = build_pyramid(cloud, base_voxel, stages);
  PreparedCloud out;
  out.dense = std::move(levels.front());
  out.coarse = std::move(levels.back());
  const int kk = std::min<int>(k, static_cast<int>(out.coarse.size()));
  out.graph = build_superpoint_graph(out.dense.points, out.coarse.points, kk, edge_k);
  return out;
}

std::vector<int> superpoint_labels(const SuperpointGraph& graph, std::span<const int> dense_labels) {
  std::vector<int> labels(graph.size(), kBackgroundLabel);
  for (int s = 0; s < graph.size(); ++s) {
    std::map<int, std::size_t> votes;
    for (int idx : graph.patch_of[s]) ++votes[dense_labels[idx]];
    if (!votes.empty()) labels[s] = majority(votes);
  }
  return labels;
}

}  // namespace instreg
