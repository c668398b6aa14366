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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "instreg/error.hpp"
#include "instreg/geometry.hpp"
#include "instreg_oracle/oracle.hpp"

namespace instreg {
namespace {

double rotation_gap(const RigidTransform& a, const RigidTransform& b) { return (a.rotation - b.rotation).norm(); }
double translation_gap(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation - b.translation).norm();
}

Points random_points(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Points out;
  for (int i = 0; i < n; ++i) out.emplace_back(g(rng), g(rng), g(rng));
  return out;
}

std::vector<Correspondence> exact_pairs(const RigidTransform& t, const Points& src) {
  std::vector<Correspondence> out;
  for (const auto& p : src) out.push_back({p, t(p), 1.0});
  return out;
}

TEST(ApplyTransform, IdentityLeavesPointsAlone) {
  const Points in{{1, 2, 3}};
  const Points out = apply_transform(RigidTransform::identity(), in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], Point3(1, 2, 3));
}

TEST(ApplyTransform, PureTranslation) {
  RigidTransform t;
  t.translation = {0, 0, 1};
  const Points in{{0, 0, 0}};
  EXPECT_EQ(apply_transform(t, in)[0], Point3(0, 0, 1));
}

TEST(ApplyTransform, QuarterTurnAboutZ) {
  const auto t = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 2);
  const Points in{{1, 0, 0}};
  EXPECT_LT((apply_transform(t, in)[0] - Point3(0, 1, 0)).norm(), 1e-15);
}

TEST(RigidTransform, ComposeAndInvert) {
  std::mt19937_64 rng(3);
  const auto a = oracle::random_pose(rng, 2.0);
  const auto b = oracle::random_pose(rng, 2.0);
  const Point3 x(0.3, -1.2, 0.7);
  EXPECT_LT(((a * b)(x) - a(b(x))).norm(), 1e-12);
  const auto id = a * a.inverse();
  EXPECT_LT(rotation_gap(id, RigidTransform::identity()), 1e-12);
  EXPECT_LT(id.translation.norm(), 1e-12);
  EXPECT_TRUE(a.is_valid());
}

TEST(RigidTransform, ReflectionIsNotValid) {
  RigidTransform t;
  t.rotation(2, 2) = -1.0;
  EXPECT_FALSE(t.is_valid());
}

TEST(WeightedSvd, SelfPairsGiveIdentity) {
  std::mt19937_64 rng(1);
  const auto pts = random_points(rng, 12);
  const auto t = weighted_svd(exact_pairs(RigidTransform::identity(), pts));
  EXPECT_LT(rotation_gap(t, RigidTransform::identity()), 1e-12);
  EXPECT_LT(t.translation.norm(), 1e-12);
}

TEST(WeightedSvd, RecoversSeededPose) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto truth = oracle::random_pose(rng, 3.0);
    const auto t = weighted_svd(exact_pairs(truth, random_points(rng, 10)));
    EXPECT_LT(rotation_gap(t, truth), 1e-9);
    EXPECT_LT(translation_gap(t, truth), 1e-9);
    EXPECT_TRUE(t.is_valid(1e-12));
  }
}

TEST(WeightedSvd, ZeroWeightOutlierIsIgnored) {
  std::mt19937_64 rng(11);
  const auto truth = oracle::random_pose(rng, 1.0);
  auto corrs = exact_pairs(truth, random_points(rng, 9));
  const auto clean = weighted_svd(corrs);
  corrs.push_back({{5, 5, 5}, {-40, 2, 9}, 0.0});
  const auto dirty = weighted_svd(corrs);
  EXPECT_EQ(clean.rotation, dirty.rotation);
  EXPECT_EQ(clean.translation, dirty.translation);
  EXPECT_LT(rotation_gap(dirty, truth), 1e-9);
}

// Noisy, unevenly weighted pairs have no exact answer; compare against the quaternion solver.
TEST(WeightedSvd, AgreesWithQuaternionSolverUnderNoise) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto truth = oracle::random_pose(rng, 2.0);
    std::vector<Correspondence> corrs;
    for (const auto& p : random_points(rng, 25)) {
      corrs.push_back({p, truth(p) + Point3(noise(rng), noise(rng), noise(rng)), weight(rng)});
    }
    const auto a = weighted_svd(corrs);
    const auto b = oracle::horn_quaternion(corrs);
    EXPECT_LT(rotation_gap(a, b), 1e-8);
    EXPECT_LT(translation_gap(a, b), 1e-8);
  }
}

TEST(WeightedSvd, ReflectionCaseStaysProper) {
  // planar source mirrored through its plane; the unconstrained optimum is a reflection
  const Points src{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}, {0.5, 0.5, 0}};
  std::vector<Correspondence> corrs;
  for (const auto& p : src) corrs.push_back({p, Point3(p.x(), -p.y(), 0.0), 1.0});
  const auto t = weighted_svd(corrs);
  EXPECT_TRUE(t.is_valid(1e-12));
  EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-12);
}

TEST(WeightedSvd, TooFewPositiveWeightsThrow) {
  std::vector<Correspondence> corrs{{{0, 0, 0}, {0, 0, 0}, 1.0}, {{1, 0, 0}, {1, 0, 0}, 1.0}, {{0, 1, 0}, {0, 1, 0}, 0.0}};
  try {
    weighted_svd(corrs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(WeightedSvd, CollinearPointsThrow) {
  std::vector<Correspondence> corrs;
  for (int i = 0; i < 5; ++i) corrs.push_back({{double(i), 0, 0}, {double(i), 0, 0}, 1.0});
  EXPECT_THROW(weighted_svd(corrs), Error);
}

TEST(AddDistance, IdenticalPosesGiveZero) {
  std::mt19937_64 rng(2);
  const auto model = random_points(rng, 30);
  const auto t = oracle::random_pose(rng, 1.0);
  EXPECT_EQ(add_distance(t, t, model), 0.0);
  EXPECT_EQ(add_s_distance(t, t, model), 0.0);
}

TEST(AddDistance, UniformShift) {
  std::mt19937_64 rng(2);
  const auto model = random_points(rng, 30);
  RigidTransform shift;
  shift.translation = {0, 0, 0.37};
  EXPECT_NEAR(add_distance(RigidTransform::identity(), shift, model), 0.37, 1e-15);
}

TEST(AddDistance, HalfTurnOnCircleMatchesDirectSum) {
  Points circle;
  for (int i = 0; i < 36; ++i) circle.emplace_back(std::cos(i * M_PI / 18), std::sin(i * M_PI / 18), 0.0);
  const auto half = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI);
  double sum = 0.0;
  for (const auto& p : circle) sum += (p - half(p)).norm();
  EXPECT_NEAR(add_distance(RigidTransform::identity(), half, circle), sum / circle.size(), 1e-12);
  EXPECT_NEAR(add_distance(RigidTransform::identity(), half, circle), 2.0, 1e-12);
}

TEST(AddDistance, EmptyModelThrows) {
  const Points none;
  EXPECT_THROW(add_distance(RigidTransform::identity(), RigidTransform::identity(), none), Error);
  EXPECT_THROW(add_s_distance(RigidTransform::identity(), RigidTransform::identity(), none), Error);
}

TEST(AddSDistance, SymmetryRotationOfPolygonIsFree) {
  Points hexagon;
  for (int i = 0; i < 6; ++i) hexagon.emplace_back(std::cos(i * M_PI / 3), std::sin(i * M_PI / 3), 0.0);
  const auto turn = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 3);
  EXPECT_LT(add_s_distance(RigidTransform::identity(), turn, hexagon), 1e-12);
  EXPECT_GT(add_distance(RigidTransform::identity(), turn, hexagon), 0.9);
}

TEST(AddSDistance, ThreePointModelMatchesExhaustiveMin) {
  const Points model{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}};
  RigidTransform shift;
  shift.translation = {0.8, 0.1, 0};
  double sum = 0.0;
  for (const auto& p : model) {
    double best = 1e300;
    for (const auto& q : model) best = std::min(best, (p - shift(q)).norm());
    sum += best;
  }
  EXPECT_NEAR(add_s_distance(RigidTransform::identity(), shift, model), sum / 3.0, 1e-15);
}

TEST(RreRte, Zero) {
  std::mt19937_64 rng(4);
  const auto t = oracle::random_pose(rng, 1.0);
  const auto e = rre_rte(t, t);
  EXPECT_NEAR(e.rotation_deg, 0.0, 1e-6);
  EXPECT_EQ(e.translation, 0.0);
}

TEST(RreRte, FifteenDegreesAboutAnyAxis) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    const auto gt = oracle::random_pose(rng, 1.0);
    const Eigen::Vector3d axis = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    RigidTransform pred = gt;
    pred.rotation = Eigen::AngleAxisd(15.0 * M_PI / 180.0, axis).toRotationMatrix() * gt.rotation;
    const auto e = rre_rte(pred, gt);
    EXPECT_NEAR(e.rotation_deg, 15.0, 1e-9);
    EXPECT_NEAR(e.translation, 0.0, 1e-15);
  }
}

TEST(RreRte, TranslationOffset) {
  RigidTransform pred;
  pred.translation = {0.1, 0, 0};
  const auto e = rre_rte(pred, RigidTransform::identity());
  EXPECT_EQ(e.rotation_deg, 0.0);
  EXPECT_NEAR(e.translation, 0.1, 1e-15);
}

TEST(RreRte, NearHalfTurnStaysAccurate) {
  const auto pred = RigidTransform::from_axis_angle(Eigen::Vector3d(1, 1, 0).normalized(), M_PI - 1e-7);
  EXPECT_NEAR(rre_rte(pred, RigidTransform::identity()).rotation_deg, 180.0 - 1e-7 * 180.0 / M_PI, 1e-6);
}

TEST(Diameter, MatchesPairScan) {
  std::mt19937_64 rng(6);
  const auto pts = random_points(rng, 40);
  double best = 0.0;
  for (const auto& a : pts)
    for (const auto& b : pts) best = std::max(best, (a - b).norm());
  EXPECT_DOUBLE_EQ(diameter(pts), best);
}

TEST(SubsampleStride, KeepsAtMostRequested) {
  std::mt19937_64 rng(6);
  const auto pts = random_points(rng, 100);
  EXPECT_EQ(subsample_stride(pts, 1000).size(), 100u);
  EXPECT_LE(subsample_stride(pts, 30).size(), 30u);
  EXPECT_EQ(subsample_stride(pts, 30).front(), pts.front());
}

}  // namespace
}  // namespace instreg
