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

#include "instreg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "instreg/error.hpp"

namespace instreg {
namespace {

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

void LossConfig::validate() const {
  if (!(delta_n > delta_p)) throw Error(ErrorCode::InvalidArgument, "delta_n must exceed delta_p");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
}

double circle_loss_term(std::span<const double> pos_dist, std::span<const double> pos_overlap,
                        std::span<const double> neg_dist, const LossConfig& cfg) {
  cfg.validate();
  if (pos_dist.empty()) throw Error(ErrorCode::NoPositives, "anchor has no positives");
  if (neg_dist.empty()) throw Error(ErrorCode::NoNegatives, "anchor has no negatives");
  if (pos_dist.size() != pos_overlap.size()) throw Error(ErrorCode::LengthMismatch, "one overlap per positive");

  std::vector<double> pos(pos_dist.size());
  for (std::size_t i = 0; i < pos_dist.size(); ++i) {
    const double o = pos_overlap[i];
    if (!(o >= 0.0 && o <= 1.0)) throw Error(ErrorCode::InvalidArgument, "overlap must lie in [0, 1]");
    const double gap = pos_dist[i] - cfg.delta_p;
    pos[i] = std::sqrt(o) * cfg.gamma * gap * gap;
  }
  std::vector<double> neg(neg_dist.size());
  for (std::size_t i = 0; i < neg_dist.size(); ++i) {
    const double gap = cfg.delta_n - neg_dist[i];
    neg[i] = cfg.gamma * gap * gap;
  }
  return softplus(log_sum_exp(pos) + log_sum_exp(neg));
}

double circle_loss(std::span<const CircleAnchor> anchors, const LossConfig& cfg) {
  if (anchors.empty()) throw Error(ErrorCode::InvalidArgument, "circle loss needs at least one anchor");
  double total = 0.0;
  for (const auto& a : anchors) {
    std::vector<double> pd, po, nd;
    for (const auto& p : a.positives) {
      if (p.feature.size() != a.feature.size()) throw Error(ErrorCode::ShapeMismatch, "feature dims differ");
      pd.push_back((a.feature - p.feature).norm());
      po.push_back(p.overlap);
    }
    for (const auto& n : a.negatives) {
      if (n.size() != a.feature.size()) throw Error(ErrorCode::ShapeMismatch, "feature dims differ");
      nd.push_back((a.feature - n).norm());
    }
    total += circle_loss_term(pd, po, nd, cfg);
  }
  return total / static_cast<double>(anchors.size());
}

double nll_matching_loss(const Eigen::MatrixXd& assignment, std::span<const std::pair<int, int>> gt_pairs,
                         std::span<const int> unmatched_p, std::span<const int> unmatched_q) {
  const int rows = static_cast<int>(assignment.rows());
  const int cols = static_cast<int>(assignment.cols());
  if (rows < 2 || cols < 2) throw Error(ErrorCode::ShapeMismatch, "assignment needs a real block and dustbins");
  const int n = rows - 1;
  const int m = cols - 1;
  auto entry = [&](int r, int c) {
    const double z = assignment(r, c);
    if (!(z > 0.0 && z <= 1.0)) throw Error(ErrorCode::InvalidArgument, "assignment entries must lie in (0, 1]");
    return std::log(z);
  };
  double loss = 0.0;
  for (const auto& [x, y] : gt_pairs) {
    if (x < 0 || x >= n || y < 0 || y >= m) throw Error(ErrorCode::IndexOutOfRange, "gt pair outside assignment");
    loss -= entry(x, y);
  }
  for (int x : unmatched_p) {
    if (x < 0 || x >= n) throw Error(ErrorCode::IndexOutOfRange, "unmatched model index outside assignment");
    loss -= entry(x, m);
  }
  for (int y : unmatched_q) {
    if (y < 0 || y >= m) throw Error(ErrorCode::IndexOutOfRange, "unmatched scene index outside assignment");
    loss -= entry(n, y);
  }
  return loss;
}

MaskLossTerms mask_loss_terms(std::span<const double> pred, const std::vector<bool>& gt) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::LengthMismatch, "prediction and target lengths differ");
  if (pred.empty()) throw Error(ErrorCode::InvalidArgument, "mask loss needs at least one entry");
  double bce = 0.0;
  double inter = 0.0;
  double pred_sum = 0.0;
  double gt_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double m = pred[i];
    if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mask confidences must lie in [0, 1]");
    // 0 * log(0) is taken as 0.
    if (gt[i]) {
      if (m < 1.0) bce -= std::log(m);
      inter += m;
      gt_sum += 1.0;
    } else if (m > 0.0) {
      bce -= std::log1p(-m);
    }
    pred_sum += m;
  }
  MaskLossTerms out;
  out.bce = bce / static_cast<double>(pred.size());
  out.dice = 1.0 - 2.0 * (inter + 1.0) / (pred_sum + gt_sum + 1.0);
  return out;
}

double mask_loss(std::span<const double> pred, const std::vector<bool>& gt) { return mask_loss_terms(pred, gt).total(); }

}  // namespace instreg
