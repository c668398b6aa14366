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

#include "instreg/attention.hpp"
#include "instreg/geometry.hpp"
#include "instreg/preprocess.hpp"

namespace instreg {

struct Thresholds {
  double rre_deg = 15.0;
  double rte = 0.1;
  double adds_fraction = 0.1;  // ADD-S limit as a fraction of the diameter
  double tau1 = 0.05;

  void validate() const;
};

struct InstanceMatch {
  int gt = 0;
  int pred = 0;
  double rre_deg = 0.0;
  double rte = 0.0;
  double add = 0.0;  // ADD, or ADD-S for symmetric models
};

struct MetricsReport {
  int num_gt = 0;
  int num_pred = 0;
  int num_registered = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double inlier_ratio = 0.0;
  double miou = 0.0;
  std::vector<InstanceMatch> matches;
  double runtime_s = 0.0;
};

/// 2ab / (a + b), or 0 when a + b = 0.
double harmonic_mean(double a, double b);

/// Success is RRE <= rre_deg and RTE <= rte, or ADD-S <= adds_fraction *
/// diameter when `symmetric`. Successful (prediction, instance) pairs are
/// assigned one-to-one greedily by ascending ADD, ties by (gt, pred).
/// Precision is 0 without predictions and recall 0 without instances.
MetricsReport evaluate(std::span<const RigidTransform> pred, std::span<const RigidTransform> gt,
                       std::span<const Point3> model, double model_diameter, const Thresholds& th, bool symmetric);

/// Fraction of correspondences with min_k ||T_k(p) - q|| < tau1.
double inlier_ratio_metric(std::span<const Correspondence> corrs, std::span<const RigidTransform> gt, double tau1);

/// Allowed iff the anchor and the neighbor share an instance label >= 1; slot 0 always allowed.
InstanceMask ground_truth_mask(const SuperpointGraph& graph, std::span<const int> superpoint_labels);

/// Mean over anchors of |pred AND gt| / |pred OR gt|; an anchor with both empty scores 1.
double mask_miou(const InstanceMask& pred, const InstanceMask& gt);

struct Aggregate {
  int scenes = 0;
  int instances = 0;
  double mr = 0.0;
  double mp = 0.0;
  double mf = 0.0;
  double ir = 0.0;
  double miou = 0.0;
  double runtime_s = 0.0;
};

/// Means over scenes; MF is the harmonic mean of MR and MP.
Aggregate aggregate(std::span<const MetricsReport> reports);

}  // namespace instreg
