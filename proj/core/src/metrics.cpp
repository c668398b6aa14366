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

#include "instreg/metrics.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "instreg/error.hpp"

namespace instreg {

void Thresholds::validate() const {
  if (!(rre_deg > 0.0 && rte > 0.0 && adds_fraction > 0.0 && tau1 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "evaluation thresholds must be positive");
  }
}

double harmonic_mean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

MetricsReport evaluate(std::span<const RigidTransform> pred, std::span<const RigidTransform> gt,
                       std::span<const Point3> model, double model_diameter, const Thresholds& th, bool symmetric) {
  th.validate();
  if (model.empty()) throw Error(ErrorCode::EmptyModel, "evaluation needs model points");
  MetricsReport r;
  r.num_gt = static_cast<int>(gt.size());
  r.num_pred = static_cast<int>(pred.size());

  const Points sub = subsample_stride(model, symmetric ? 256 : 1024);
  double radius = 0.0;
  for (const auto& q : sub) radius = std::max(radius, q.norm());
  const double adds_limit = th.adds_fraction * model_diameter;
  std::vector<InstanceMatch> ok;
  for (int g = 0; g < r.num_gt; ++g) {
    for (int p = 0; p < r.num_pred; ++p) {
      const PoseError e = rre_rte(pred[p], gt[g]);
      InstanceMatch m{g, p, e.rotation_deg, e.translation, 0.0};
      bool success;
      if (symmetric) {
        // ADD-S >= |t1 - t2| - 2 * radius, so far-apart pairs cannot pass.
        if (e.translation - 2.0 * radius > adds_limit) continue;
        m.add = add_s_distance(pred[p], gt[g], sub);
        success = m.add <= adds_limit;
      } else {
        success = e.rotation_deg <= th.rre_deg && e.translation <= th.rte;
        if (success) m.add = add_distance(pred[p], gt[g], sub);
      }
      if (success) ok.push_back(m);
    }
  }
  std::sort(ok.begin(), ok.end(), [](const InstanceMatch& a, const InstanceMatch& b) {
    return std::tie(a.add, a.gt, a.pred) < std::tie(b.add, b.gt, b.pred);
  });
  std::vector<char> gt_used(r.num_gt, 0), pred_used(r.num_pred, 0);
  for (const auto& m : ok) {
    if (gt_used[m.gt] || pred_used[m.pred]) continue;
    gt_used[m.gt] = pred_used[m.pred] = 1;
    r.matches.push_back(m);
  }
  std::sort(r.matches.begin(), r.matches.end(), [](const auto& a, const auto& b) { return a.gt < b.gt; });
  r.num_registered = static_cast<int>(r.matches.size());
  r.recall = r.num_gt > 0 ? static_cast<double>(r.num_registered) / r.num_gt : 0.0;
  r.precision = r.num_pred > 0 ? static_cast<double>(r.num_registered) / r.num_pred : 0.0;
  r.f1 = harmonic_mean(r.recall, r.precision);
  return r;
}

double inlier_ratio_metric(std::span<const Correspondence> corrs, std::span<const RigidTransform> gt, double tau1) {
  if (corrs.empty()) throw Error(ErrorCode::EmptyCorrespondences, "inlier ratio of an empty correspondence set");
  std::size_t inliers = 0;
  for (const auto& c : corrs) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : gt) best = std::min(best, (t(c.source) - c.target).norm());
    inliers += best < tau1;
  }
  return static_cast<double>(inliers) / static_cast<double>(corrs.size());
}

InstanceMask ground_truth_mask(const SuperpointGraph& graph, std::span<const int> superpoint_labels) {
  if (static_cast<int>(superpoint_labels.size()) != graph.size()) {
    throw Error(ErrorCode::LengthMismatch, "one label per superpoint");
  }
  InstanceMask m;
  m.allowed.resize(graph.size(), graph.k());
  m.confidence.resize(graph.size(), graph.k());
  for (int i = 0; i < graph.size(); ++i) {
    for (int s = 0; s < graph.k(); ++s) {
      const int li = superpoint_labels[i];
      const bool same = li >= 1 && superpoint_labels[graph.neighbor(i, s)] == li;
      m.allowed(i, s) = s == 0 || same;
      m.confidence(i, s) = m.allowed(i, s) ? 1.0 : 0.0;
    }
  }
  return m;
}

double mask_miou(const InstanceMask& pred, const InstanceMask& gt) {
  if (pred.anchors() != gt.anchors() || pred.slots() != gt.slots()) {
    throw Error(ErrorCode::ShapeMismatch, "masks must have the same shape");
  }
  if (pred.anchors() == 0) return 1.0;
  double total = 0.0;
  for (int i = 0; i < pred.anchors(); ++i) {
    const auto inter = (pred.allowed.row(i) && gt.allowed.row(i)).count();
    const auto uni = (pred.allowed.row(i) || gt.allowed.row(i)).count();
    total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return total / pred.anchors();
}

Aggregate aggregate(std::span<const MetricsReport> reports) {
  Aggregate a;
  a.scenes = static_cast<int>(reports.size());
  if (reports.empty()) return a;
  for (const auto& r : reports) {
    a.instances += r.num_gt;
    a.mr += r.recall;
    a.mp += r.precision;
    a.ir += r.inlier_ratio;
    a.miou += r.miou;
    a.runtime_s += r.runtime_s;
  }
  const double n = static_cast<double>(reports.size());
  a.mr /= n;
  a.mp /= n;
  a.ir /= n;
  a.miou /= n;
  a.mf = harmonic_mean(a.mr, a.mp);
  return a;
}

}  // namespace instreg
