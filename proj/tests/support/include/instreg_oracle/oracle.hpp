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

#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "instreg/attention.hpp"
#include "instreg/geometry.hpp"
#include "instreg/matching.hpp"

// Straightforward reimplementations used to cross-check the library. They
// favor explicit loops over speed and share no code paths with core.
namespace instreg::oracle {

struct MfTriple {
  const char* table;
  const char* row;
  double mr;
  double mp;
  double mf;
  bool printed_consistent;  // false where the printed MF is not the harmonic mean of the printed MR/MP
};

/// MR/MP/MF triples of the published result tables, in percent.
std::span<const MfTriple> mf_fixtures();

RigidTransform random_pose(std::mt19937_64& rng, double translation_scale);

/// Closed-form absolute orientation through the unit quaternion of the
/// largest eigenvalue of the 4 x 4 profile matrix.
RigidTransform horn_quaternion(std::span<const Correspondence> corrs);

Eigen::MatrixXi brute_knn(std::span<const Point3> pts, int k);

/// All-pairs shortest paths over the symmetrized `edge_k`-nearest-neighbor
/// graph, read back at the slots of `knn`.
Eigen::MatrixXd floyd_geodesic(std::span<const Point3> pts, const Eigen::MatrixXi& knn, int edge_k);

std::vector<SuperpointCorrespondence> brute_superpoint_match(const Eigen::MatrixXd& zp, const Eigen::MatrixXd& zq,
                                                             int n_c);

/// Log-domain Sinkhorn with the same dustbin marginals, using scalar loops.
Eigen::MatrixXd naive_sinkhorn_log(const Eigen::MatrixXd& scores, double dustbin, int iterations);

/// Full sort of each row and column, then intersection.
std::vector<std::pair<int, int>> brute_mutual_top_k(const Eigen::MatrixXd& z, int k);

Eigen::MatrixXd naive_layer_norm(const Eigen::MatrixXd& x, const LayerNormWeights& w);

/// Attention of each anchor over an explicit slot list (the reduced
/// neighborhood). `slots[i]` holds slot indices into knn row i.
Eigen::MatrixXd naive_local_attention(const Eigen::MatrixXd& x, const Eigen::MatrixXi& knn,
                                      const std::vector<std::vector<int>>& slots, const Eigen::MatrixXd* embedding,
                                      const AttentionWeights& w, int heads);

Eigen::MatrixXd naive_global_attention(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const AttentionWeights& w,
                                       int heads);

/// Output projection, residuals, norms and feed-forward around an attention result.
Eigen::MatrixXd naive_block_tail(const Eigen::MatrixXd& x, const Eigen::MatrixXd& attended, const BlockWeights& w);

/// Allowed slots of a mask as explicit lists.
std::vector<std::vector<int>> allowed_slots(const InstanceMask& mask);

/// Confidences of the masking head computed with loops.
Eigen::MatrixXd naive_mask_confidence(const Eigen::MatrixXd& features, const Eigen::MatrixXi& knn,
                                      const Eigen::MatrixXd& geodesic_raw, const InstanceMask& prev_mask,
                                      const MaskHeadWeights& w, int heads);

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick corpus of oracle comparisons; each case runs in well under a second.
std::vector<SelftestCase> run_selftest();

}  // namespace instreg::oracle
