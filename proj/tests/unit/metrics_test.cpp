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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "instreg/error.hpp"
#include "instreg/metrics.hpp"
#include "instreg_oracle/oracle.hpp"

namespace instreg {
namespace {

Points random_points(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 0.3);
  Points out;
  for (int i = 0; i < n; ++i) out.emplace_back(g(rng), g(rng), g(rng));
  return out;
}

std::vector<RigidTransform> spread_poses(std::mt19937_64& rng, int k) {
  std::vector<RigidTransform> out;
  for (int i = 0; i < k; ++i) {
    auto t = oracle::random_pose(rng, 0.0);
    t.translation = {3.0 * i, 0.0, 0.0};
    out.push_back(t);
  }
  return out;
}

TEST(HarmonicMean, HeadlineRows) {
  EXPECT_NEAR(harmonic_mean(0.3851, 0.4119), 0.3980, 5e-5);
  EXPECT_NEAR(harmonic_mean(0.9570, 0.9121), 0.9340, 5e-5);
  EXPECT_EQ(harmonic_mean(0.0, 0.0), 0.0);
  EXPECT_EQ(harmonic_mean(1.0, 1.0), 1.0);
}

TEST(HarmonicMean, PublishedTriples) {
  for (const auto& t : oracle::mf_fixtures()) {
    const double mf = 100.0 * harmonic_mean(t.mr / 100.0, t.mp / 100.0);
    if (t.printed_consistent) EXPECT_NEAR(mf, t.mf, 0.01) << t.table << " " << t.row;
  }
}

TEST(Evaluate, PerfectPredictions) {
  std::mt19937_64 rng(1);
  const auto model = random_points(rng, 100);
  const auto gt = spread_poses(rng, 5);
  const auto r = evaluate(gt, gt, model, diameter(model), Thresholds{}, false);
  EXPECT_EQ(r.num_registered, 5);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Evaluate, PartialAndSpurious) {
  std::mt19937_64 rng(2);
  const auto model = random_points(rng, 100);
  const auto gt = spread_poses(rng, 4);
  std::vector<RigidTransform> pred{gt[0], gt[2]};
  RigidTransform far;
  far.translation = {-20, 0, 0};
  pred.push_back(far);
  const auto r = evaluate(pred, gt, model, diameter(model), Thresholds{}, false);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, harmonic_mean(0.5, 2.0 / 3.0));
}

TEST(Evaluate, OneToOne) {
  std::mt19937_64 rng(3);
  const auto model = random_points(rng, 60);
  const auto gt = spread_poses(rng, 1);
  const std::vector<RigidTransform> pred{gt[0], gt[0], gt[0]};
  const auto r = evaluate(pred, gt, model, diameter(model), Thresholds{}, false);
  EXPECT_EQ(r.num_registered, 1);
  EXPECT_DOUBLE_EQ(r.precision, 1.0 / 3.0);
}

TEST(Evaluate, RotationAndTranslationLimits) {
  std::mt19937_64 rng(4);
  const auto model = random_points(rng, 60);
  const std::vector<RigidTransform> gt{RigidTransform::identity()};
  Thresholds th;
  auto at = [&](double deg, double shift) {
    RigidTransform p = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitY(), deg * M_PI / 180.0);
    p.translation = {shift, 0, 0};
    const std::vector<RigidTransform> pred{p};
    return evaluate(pred, gt, model, 1.0, th, false).num_registered;
  };
  EXPECT_EQ(at(14.9, 0.0), 1);
  EXPECT_EQ(at(15.1, 0.0), 0);
  EXPECT_EQ(at(0.0, 0.099), 1);
  EXPECT_EQ(at(0.0, 0.101), 0);
}

TEST(Evaluate, SymmetricUsesAddS) {
  Points ring;
  for (int i = 0; i < 12; ++i) ring.emplace_back(std::cos(i * M_PI / 6), std::sin(i * M_PI / 6), 0.0);
  const std::vector<RigidTransform> gt{RigidTransform::identity()};
  const std::vector<RigidTransform> pred{RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 6)};
  EXPECT_EQ(evaluate(pred, gt, ring, 2.0, Thresholds{}, true).num_registered, 1);
  EXPECT_EQ(evaluate(pred, gt, ring, 2.0, Thresholds{}, false).num_registered, 0);
}

TEST(Evaluate, OrderInvariant) {
  std::mt19937_64 rng(5);
  const auto model = random_points(rng, 80);
  const auto gt = spread_poses(rng, 6);
  std::vector<RigidTransform> pred;
  std::normal_distribution<double> g(0.0, 0.02);
  for (int i = 0; i < 6; i += 2) {
    for (int d = 0; d < 2; ++d) {
      RigidTransform p = gt[i];
      p.translation += Eigen::Vector3d(g(rng), g(rng), g(rng));
      pred.push_back(p);
    }
  }
  const auto base = evaluate(pred, gt, model, diameter(model), Thresholds{}, false);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(pred.begin(), pred.end(), rng);
    const auto r = evaluate(pred, gt, model, diameter(model), Thresholds{}, false);
    EXPECT_EQ(r.num_registered, base.num_registered);
    EXPECT_EQ(r.recall, base.recall);
    EXPECT_EQ(r.precision, base.precision);
  }
}

TEST(Evaluate, Errors) {
  const std::vector<RigidTransform> one{RigidTransform::identity()};
  EXPECT_THROW(evaluate(one, one, {}, 1.0, Thresholds{}, false), Error);
  Thresholds bad;
  bad.rte = 0.0;
  const Points model{{0, 0, 0}};
  EXPECT_THROW(evaluate(one, one, model, 1.0, bad, false), Error);
}

TEST(InlierRatioMetric, Examples) {
  std::mt19937_64 rng(6);
  const auto gt = spread_poses(rng, 2);
  std::vector<Correspondence> corrs;
  const auto pts = random_points(rng, 10);
  for (int i = 0; i < 10; ++i) corrs.push_back({pts[i], gt[i % 2](pts[i]), 1.0});
  EXPECT_EQ(inlier_ratio_metric(corrs, gt, 0.05), 1.0);
  for (int i = 7; i < 10; ++i) corrs[i].target += Point3(0.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(inlier_ratio_metric(corrs, gt, 0.05), 0.7);
  EXPECT_THROW(inlier_ratio_metric({}, gt, 0.05), Error);
}

struct MaskFixture {
  SuperpointGraph graph;
  std::vector<int> labels;
};

MaskFixture mask_fixture(std::mt19937_64& rng) {
  MaskFixture f;
  f.graph.superpoints = random_points(rng, 30);
  f.graph.knn = knn_table(f.graph.superpoints, 6);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int i = 0; i < 30; ++i) f.labels.push_back(lab(rng));
  return f;
}

TEST(MaskMiou, IdentityIsOne) {
  std::mt19937_64 rng(7);
  const auto f = mask_fixture(rng);
  const auto gt = ground_truth_mask(f.graph, f.labels);
  EXPECT_EQ(mask_miou(gt, gt), 1.0);
}

TEST(MaskMiou, AllAllowedEqualsGtDensity) {
  std::mt19937_64 rng(8);
  const auto f = mask_fixture(rng);
  const auto gt = ground_truth_mask(f.graph, f.labels);
  double expect = 0.0;
  for (int i = 0; i < 30; ++i) {
    int same = 0;
    for (int s = 0; s < 6; ++s) same += s == 0 || (f.labels[i] >= 1 && f.labels[f.graph.knn(i, s)] == f.labels[i]);
    expect += same / 6.0;
  }
  EXPECT_NEAR(mask_miou(InstanceMask::all_allowed(30, 6), gt), expect / 30.0, 1e-15);
}

TEST(MaskMiou, ComplementByCount) {
  std::mt19937_64 rng(9);
  const auto f = mask_fixture(rng);
  const auto gt = ground_truth_mask(f.graph, f.labels);
  InstanceMask comp = gt;
  for (int i = 0; i < 30; ++i)
    for (int s = 1; s < 6; ++s) comp.allowed(i, s) = !gt.allowed(i, s);
  double expect = 0.0;
  for (int i = 0; i < 30; ++i) {
    // only the self slot is shared; the union is the whole row
    expect += 1.0 / 6.0;
  }
  EXPECT_NEAR(mask_miou(comp, gt), expect / 30.0, 1e-15);
}

TEST(MaskMiou, BackgroundAnchorsKeepOnlySelf) {
  std::mt19937_64 rng(10);
  auto f = mask_fixture(rng);
  std::fill(f.labels.begin(), f.labels.end(), 0);
  EXPECT_EQ(ground_truth_mask(f.graph, f.labels).allowed_count(), 30);
  f.labels.pop_back();
  EXPECT_THROW(ground_truth_mask(f.graph, f.labels), Error);
}

TEST(Aggregate, MeansAndHarmonicOfMeans) {
  std::vector<MetricsReport> reps(2);
  reps[0].num_gt = 4;
  reps[0].recall = 1.0;
  reps[0].precision = 0.5;
  reps[0].inlier_ratio = 0.2;
  reps[1].num_gt = 6;
  reps[1].recall = 0.5;
  reps[1].precision = 1.0;
  reps[1].inlier_ratio = 0.4;
  const auto a = aggregate(reps);
  EXPECT_EQ(a.scenes, 2);
  EXPECT_EQ(a.instances, 10);
  EXPECT_DOUBLE_EQ(a.mr, 0.75);
  EXPECT_DOUBLE_EQ(a.mp, 0.75);
  EXPECT_DOUBLE_EQ(a.mf, 0.75);
  EXPECT_DOUBLE_EQ(a.ir, 0.3);
  EXPECT_EQ(aggregate({}).scenes, 0);
}

}  // namespace
}  // namespace instreg
