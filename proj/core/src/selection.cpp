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

#include "instreg/selection.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "instreg/error.hpp"

namespace instreg {
namespace {

std::vector<PointMatch> inliers_of(const RigidTransform& pose, const std::vector<PointMatch>& corrs,
                                   std::span<const Point3> dense_p, std::span<const Point3> dense_q, double tau2) {
  std::vector<PointMatch> out;
  for (const auto& m : corrs) {
    if ((pose(dense_p[m.p]) - dense_q[m.q]).norm() < tau2) out.push_back(m);
  }
  return out;
}

}  // namespace

void SelectionConfig::validate() const {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be > 0");
  if (!(tau_s > 0.0 && tau_s <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau_s must lie in (0, 1]");
  if (!(tau3 >= 0.0 && tau3 <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau3 must lie in [0, 1]");
  if (refine_iters < 0) throw Error(ErrorCode::InvalidArgument, "refine_iters must be >= 0");
  if (!(diameter > 0.0)) throw Error(ErrorCode::InvalidArgument, "model diameter must be > 0");
  if (similarity_points == 0) throw Error(ErrorCode::InvalidArgument, "similarity_points must be > 0");
}

int global_inlier_count(const RigidTransform& pose, std::span<const Correspondence> global, double tau2) {
  int count = 0;
  for (const auto& c : global) {
    if ((pose(c.source) - c.target).norm() < tau2) ++count;
  }
  return count;
}

double global_inlier_ratio(const RigidTransform& pose, std::span<const Correspondence> global, double tau2) {
  if (global.empty()) throw Error(ErrorCode::EmptyCorrespondences, "global correspondence set is empty");
  return static_cast<double>(global_inlier_count(pose, global, tau2)) / static_cast<double>(global.size());
}

double pose_similarity(const RigidTransform& t1, const RigidTransform& t2, std::span<const Point3> model, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "similarity radius must be > 0");
  return 1.0 - add_distance(t1, t2, model) / r;
}

std::vector<PointMatch> merge_matches(std::span<const std::vector<PointMatch>* const> lists) {
  std::map<std::pair<int, int>, double> best;
  for (const auto* list : lists) {
    for (const auto& m : *list) {
      auto [it, inserted] = best.try_emplace({m.p, m.q}, m.score);
      if (!inserted) it->second = std::max(it->second, m.score);
    }
  }
  std::vector<PointMatch> out;
  out.reserve(best.size());
  for (const auto& [key, w] : best) out.push_back({key.first, key.second, w});
  return out;
}

std::vector<PoseHypothesis> nms_select(std::vector<PoseHypothesis> candidates, std::span<const Correspondence> global,
                                       const SelectionConfig& cfg, std::span<const Point3> model,
                                       std::span<const Point3> dense_p, std::span<const Point3> dense_q) {
  cfg.validate();
  if (candidates.empty()) return {};
  if (model.empty()) throw Error(ErrorCode::EmptyModel, "similarity needs model points");
  const Points sim_model = subsample_stride(model, cfg.similarity_points);

  for (auto& c : candidates) {
    c.inlier_count = global_inlier_count(c.pose, global, cfg.tau2);
    c.inlier_ratio = global.empty() ? 0.0 : static_cast<double>(c.inlier_count) / static_cast<double>(global.size());
  }
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (candidates[a].inlier_ratio != candidates[b].inlier_ratio) {
      return candidates[a].inlier_ratio > candidates[b].inlier_ratio;
    }
    return candidates[a].seed_index < candidates[b].seed_index;
  });

  std::vector<char> alive(candidates.size(), 1);
  std::vector<PoseHypothesis> outputs;
  for (int anchor : order) {
    if (!alive[anchor]) continue;
    const RigidTransform anchor_pose = candidates[anchor].pose;
    std::vector<const std::vector<PointMatch>*> group;
    for (int other : order) {
      if (!alive[other]) continue;
      if (other == anchor ||
          pose_similarity(anchor_pose, candidates[other].pose, sim_model, cfg.diameter) >= cfg.tau_s) {
        group.push_back(&candidates[other].corrs);
        alive[other] = 0;
      }
    }

    PoseHypothesis merged;
    merged.seed_index = candidates[anchor].seed_index;
    merged.corrs = merge_matches(group);
    merged.pose = anchor_pose;
    if (group.size() > 1) {
      try {
        merged.pose = weighted_svd(to_correspondences(merged.corrs, dense_p, dense_q));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateConfiguration) throw;
      }
    }
    for (int it = 0; it < cfg.refine_iters; ++it) {
      const auto inl = inliers_of(merged.pose, merged.corrs, dense_p, dense_q, cfg.tau2);
      if (inl.size() < 3) break;
      try {
        merged.pose = weighted_svd(to_correspondences(inl, dense_p, dense_q));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateConfiguration) throw;
        break;
      }
    }

    const bool duplicate = std::any_of(outputs.begin(), outputs.end(), [&](const PoseHypothesis& o) {
      return pose_similarity(o.pose, merged.pose, sim_model, cfg.diameter) >= cfg.tau_s;
    });
    if (duplicate) continue;
    merged.inlier_count = global_inlier_count(merged.pose, global, cfg.tau2);
    merged.inlier_ratio =
        global.empty() ? 0.0 : static_cast<double>(merged.inlier_count) / static_cast<double>(global.size());
    outputs.push_back(std::move(merged));
  }

  int max_inliers = 0;
  for (const auto& o : outputs) max_inliers = std::max(max_inliers, o.inlier_count);
  std::erase_if(outputs, [&](const PoseHypothesis& o) {
    return static_cast<double>(o.inlier_count) < cfg.tau3 * static_cast<double>(max_inliers);
  });
  return outputs;
}

}  // namespace instreg
