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
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace instreg {

struct LossConfig {
  double delta_p = 0.1;
  double delta_n = 1.4;
  double gamma = 10.0;

  void validate() const;
};

struct CirclePositive {
  Eigen::VectorXd feature;
  double overlap = 1.0;  // in [0, 1]; the positive term is scaled by sqrt(overlap)
};

struct CircleAnchor {
  Eigen::VectorXd feature;
  std::vector<CirclePositive> positives;
  std::vector<Eigen::VectorXd> negatives;
};

/// Per-anchor term from precomputed feature distances:
///
///   log(1 + sum_p exp(l_p * b_p * (d_p - dp)) * sum_n exp(b_n * (dn - d_n)))
///
/// with l_p = sqrt(o_p), b_p = gamma (d_p - dp), b_n = gamma (dn - d_n).
double circle_loss_term(std::span<const double> pos_dist, std::span<const double> pos_overlap,
                        std::span<const double> neg_dist, const LossConfig& cfg);

/// Mean of circle_loss_term over anchors, distances being L2 feature distances.
double circle_loss(std::span<const CircleAnchor> anchors, const LossConfig& cfg);

/// Negative log-likelihood of an (n+1) x (m+1) assignment whose last row and
/// column are dustbins.
double nll_matching_loss(const Eigen::MatrixXd& assignment, std::span<const std::pair<int, int>> gt_pairs,
                         std::span<const int> unmatched_p, std::span<const int> unmatched_q);

struct MaskLossTerms {
  double bce = 0.0;
  double dice = 0.0;
  double total() const { return bce + dice; }
};

/// Mean binary cross-entropy plus 1 - 2 (m . g + 1) / (|m| + |g| + 1), where
/// |.| is the entry sum.
MaskLossTerms mask_loss_terms(std::span<const double> pred, const std::vector<bool>& gt);
double mask_loss(std::span<const double> pred, const std::vector<bool>& gt);

}  // namespace instreg
