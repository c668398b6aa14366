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

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "instreg/attention.hpp"
#include "instreg/geometry.hpp"
#include "instreg/preprocess.hpp"

namespace instreg {

struct SuperpointCorrespondence {
  int p_index = 0;
  int q_index = 0;
  double score = 0.0;  // cosine similarity
};

/// A point pair with its assignment score. Indices refer to whichever point
/// list produced them (candidate-local inside sinkhorn_match, dense afterwards).
struct PointMatch {
  int p = 0;
  int q = 0;
  double score = 0.0;
};

struct InstanceCandidate {
  SuperpointCorrespondence seed;
  int seed_rank = 0;            // position of the seed in the superpoint ranking
  std::vector<int> p_points;    // dense model indices
  std::vector<int> q_points;    // dense scene indices
  std::vector<PointMatch> point_corrs;  // dense indices
  std::optional<RigidTransform> pose;
};

/// Top `n_c` (i, j) pairs by cosine similarity of rows of zP and zQ, sorted
/// by descending score with ties by ascending (i, j). Zero rows score 0.
std::vector<SuperpointCorrespondence> superpoint_match(const FeatureMatrix& zp, const FeatureMatrix& zq, int n_c);

/// Collects the dense points around the seed: every kNN patch on the model
/// side, only mask-allowed kNN patches on the scene side. Each side keeps at
/// most `cap` points, nearest to its seed superpoint first.
InstanceCandidate expand_candidate(const SuperpointCorrespondence& corr, const SuperpointGraph& graph_p,
                                   const SuperpointGraph& graph_q, std::span<const Point3> dense_p,
                                   std::span<const Point3> dense_q, const InstanceMask& mask_q, int cap);

struct SinkhornConfig {
  int iterations = 100;
  int mutual_k = 3;
  double dustbin_score = 1.0;

  void validate() const;
};

/// Log of the (n+1) x (m+1) assignment for an n x m score matrix with one
/// dustbin row and column. Target marginals: real rows and columns 1, the
/// dustbin row m, the dustbin column n. Alternates row and column
/// normalization `iterations` times, ending on columns.
Eigen::MatrixXd sinkhorn_log_assignment(const Eigen::MatrixXd& scores, double dustbin_score, int iterations);

/// Pairs (i, j) over the real block where j is among row i's top `k` and i is
/// among column j's top `k`. Ranking is by descending value, ties by index.
/// Output is sorted by (i, j) and carries the assignment value as score.
std::vector<PointMatch> mutual_top_k(const Eigen::MatrixXd& assignment, int k);

/// Scores featP featQ^T / sqrt(D), Sinkhorn, mutual top-k. Indices are rows of the inputs.
std::vector<PointMatch> sinkhorn_match(const FeatureMatrix& feat_p, const FeatureMatrix& feat_q,
                                       const SinkhornConfig& cfg);

/// Runs sinkhorn_match on the candidate's point features and stores dense-index matches.
void match_candidate(InstanceCandidate& cand, const FeatureMatrix& point_feat_p, const FeatureMatrix& point_feat_q,
                     const SinkhornConfig& cfg);

std::vector<Correspondence> to_correspondences(std::span<const PointMatch> matches, std::span<const Point3> dense_p,
                                               std::span<const Point3> dense_q);

/// Weighted SVD over the candidate's matches, stored on the candidate. Throws
/// TooFewCorrespondences below three matches and DegenerateConfiguration on a
/// rank-deficient solve; either way `pose` is left empty.
RigidTransform candidate_pose(InstanceCandidate& cand, std::span<const Point3> dense_p,
                              std::span<const Point3> dense_q);

}  // namespace instreg
