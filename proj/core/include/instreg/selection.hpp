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

#include "instreg/geometry.hpp"
#include "instreg/matching.hpp"

namespace instreg {

struct PoseHypothesis {
  RigidTransform pose;
  std::vector<PointMatch> corrs;  // dense (model, scene) indices with assignment weights
  double inlier_ratio = 0.0;      // over the global correspondence set
  int inlier_count = 0;           // over the global correspondence set
  int seed_index = 0;             // tie-breaker: lower wins
};

struct SelectionConfig {
  double tau2 = 0.05;
  double tau_s = 0.8;
  double tau3 = 0.8;
  int refine_iters = 5;
  double diameter = 1.0;
  std::size_t similarity_points = 1024;

  void validate() const;
};

/// Number of correspondences with ||R p + t - q|| < tau2.
int global_inlier_count(const RigidTransform& pose, std::span<const Correspondence> global, double tau2);

/// global_inlier_count / |global|. Throws EmptyCorrespondences on an empty set.
double global_inlier_ratio(const RigidTransform& pose, std::span<const Correspondence> global, double tau2);

/// 1 - ADD(t1, t2) / r.
double pose_similarity(const RigidTransform& t1, const RigidTransform& t2, std::span<const Point3> model, double r);

/// Union of correspondence lists keyed by (p, q), keeping the larger weight.
/// Output is sorted by (p, q).
std::vector<PointMatch> merge_matches(std::span<const std::vector<PointMatch>* const> lists);

/// Greedy anchor-and-merge over candidates ranked by global inlier ratio,
/// followed by inlier refinement and the min-inlier filter. Candidate inlier
/// statistics are recomputed from `global`. A merged pose that lands within
/// tau_s of an already emitted output is dropped, so outputs stay pairwise
/// dissimilar.
std::vector<PoseHypothesis> nms_select(std::vector<PoseHypothesis> candidates, std::span<const Correspondence> global,
                                       const SelectionConfig& cfg, std::span<const Point3> model,
                                       std::span<const Point3> dense_p, std::span<const Point3> dense_q);

}  // namespace instreg
