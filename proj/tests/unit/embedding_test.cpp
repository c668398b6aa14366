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

#include <gtest/gtest.h>

#include "instreg/embedding.hpp"
#include "instreg/error.hpp"
#include "instreg_oracle/oracle.hpp"

namespace instreg {
namespace {

SuperpointGraph graph_of(const Points& pts, int k) {
  SuperpointGraph g;
  g.superpoints = pts;
  g.knn = knn_table(pts, k);
  g.geodesic = geodesic_table(g, k);
  return g;
}

Points random_points(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 0.5);
  Points out;
  for (int i = 0; i < n; ++i) out.emplace_back(g(rng), g(rng), g(rng));
  return out;
}

// the self slot has a zero offset; its angle is taken as 0
double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  if (a.isZero(0.0) || b.isZero(0.0)) return 0.0;
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / M_PI;
}

TEST(SinusoidalEmbed, ZeroAlternates) {
  const auto e = sinusoidal_embed(0.0, 0.3, 8);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(e(i), i % 2 == 0 ? 0.0 : 1.0);
}

TEST(SinusoidalEmbed, ValueEqualToSigma) {
  const auto e = sinusoidal_embed(0.2, 0.2, 2);
  EXPECT_NEAR(e(0), std::sin(1.0), 1e-15);
  EXPECT_NEAR(e(1), std::cos(1.0), 1e-15);
}

TEST(SinusoidalEmbed, PiSigma) {
  const auto e = sinusoidal_embed(M_PI * 0.5, 0.5, 2);
  EXPECT_NEAR(e(0), 0.0, 1e-15);
  EXPECT_NEAR(e(1), -1.0, 1e-15);
}

TEST(SinusoidalEmbed, FrequencyLadder) {
  const int dim = 16;
  const auto e = sinusoidal_embed(3.7, 0.4, dim);
  for (int k = 0; k < dim / 2; ++k) {
    const double arg = (3.7 / 0.4) / std::pow(10000.0, 2.0 * k / dim);
    EXPECT_NEAR(e(2 * k), std::sin(arg), 1e-12);
    EXPECT_NEAR(e(2 * k + 1), std::cos(arg), 1e-12);
  }
}

TEST(SinusoidalEmbed, OddDimThrows) { EXPECT_THROW(sinusoidal_embed(1.0, 1.0, 3), Error); }

TEST(EmbeddingConfig, Validation) {
  EmbeddingConfig c;
  EXPECT_NO_THROW(c.validate());
  c.sigma_a = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = EmbeddingConfig{};
  c.dim = 7;
  EXPECT_THROW(c.validate(), Error);
}

TEST(StructureEmbedding, SingleNeighborHasNoAngleTerm) {
  const Points pts{{0, 0, 0}, {0.3, 0.1, 0}};
  EmbeddingConfig cfg;
  cfg.dim = 8;
  const auto g = graph_of(pts, 2);
  const auto emb = geometric_structure_embedding(g, cfg);
  const double d = (pts[0] - pts[1]).norm();
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT((emb.row(i, 1) - sinusoidal_embed(d, cfg.sigma_d, 8)).cwiseAbs().maxCoeff(), 1e-15);
    // the self slot still sees the other point as a reference at angle 0
    EXPECT_LT((emb.row(i, 0) - 2.0 * sinusoidal_embed(0.0, 1.0, 8)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(StructureEmbedding, EquilateralDistanceComponent) {
  const Points tri{{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(0.75), 0}};
  EmbeddingConfig cfg;
  cfg.sigma_d = 1.0;
  cfg.dim = 16;
  const auto comp = geometric_structure_components(graph_of(tri, 3), cfg);
  const auto unit = sinusoidal_embed(1.0, 1.0, 16);
  for (int i = 0; i < 3; ++i)
    for (int s = 1; s < 3; ++s) EXPECT_LT((comp.distance.row(i, s) - unit).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StructureEmbedding, MatchesDirectFormula) {
  std::mt19937_64 rng(1);
  const auto pts = random_points(rng, 20);
  EmbeddingConfig cfg;
  cfg.dim = 12;
  const int k = 6;
  const auto g = graph_of(pts, k);
  const auto emb = geometric_structure_embedding(g, cfg);
  for (int i = 0; i < 20; ++i) {
    for (int s = 0; s < k; ++s) {
      const int n = g.knn(i, s);
      Eigen::RowVectorXd expect = sinusoidal_embed((pts[n] - pts[i]).norm(), cfg.sigma_d, cfg.dim);
      Eigen::RowVectorXd best = Eigen::RowVectorXd::Constant(cfg.dim, -1e300);
      int used = 0;
      for (int t = 1; t < k && used < 3; ++t) {
        const int x = g.knn(i, t);
        if (x == n) continue;
        ++used;
        const auto a = sinusoidal_embed(angle_deg(pts[n] - pts[i], pts[x] - pts[i]) / cfg.sigma_a, 1.0, cfg.dim);
        best = best.cwiseMax(a);
      }
      if (used > 0) expect += best;
      EXPECT_LT((emb.row(i, s) - expect).cwiseAbs().maxCoeff(), 1e-9) << i << "," << s;
    }
  }
}

TEST(StructureEmbedding, EntriesWithinTwo) {
  std::mt19937_64 rng(2);
  EmbeddingConfig cfg;
  cfg.dim = 32;
  const auto emb = geometric_structure_embedding(graph_of(random_points(rng, 40), 10), cfg);
  EXPECT_LE(emb.data.cwiseAbs().maxCoeff(), 2.0);
  EXPECT_TRUE(emb.data.allFinite());
}

TEST(StructureEmbedding, RigidInvariance) {
  std::mt19937_64 rng(3);
  EmbeddingConfig cfg;
  cfg.dim = 32;
  for (int rep = 0; rep < 10; ++rep) {
    const auto pts = random_points(rng, 30);
    const auto t = oracle::random_pose(rng, 5.0);
    const auto a = geometric_structure_embedding(graph_of(pts, 8), cfg);
    const auto b = geometric_structure_embedding(graph_of(apply_transform(t, pts), 8), cfg);
    EXPECT_LT((a.data - b.data).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(GeodesicEmbedding, IdentityOnSelfSlot) {
  std::mt19937_64 rng(4);
  EmbeddingConfig cfg;
  cfg.dim = 8;
  const auto g = graph_of(random_points(rng, 10), 4);
  const auto emb = geodesic_embedding(g, cfg, Eigen::MatrixXd::Identity(8, 8));
  for (int i = 0; i < 10; ++i)
    for (int c = 0; c < 8; ++c) EXPECT_EQ(emb.row(i, 0)(c), c % 2 == 0 ? 0.0 : 1.0);
}

TEST(GeodesicEmbedding, ZeroProjectionAnnihilates) {
  std::mt19937_64 rng(4);
  EmbeddingConfig cfg;
  cfg.dim = 8;
  const auto emb = geodesic_embedding(graph_of(random_points(rng, 10), 4), cfg, Eigen::MatrixXd::Zero(8, 8));
  EXPECT_EQ(emb.data.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GeodesicEmbedding, RandomProjectionMatchesLoopProduct) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  EmbeddingConfig cfg;
  cfg.dim = 10;
  SuperpointGraph g;
  g.superpoints = random_points(rng, 15);
  g.knn = knn_table(g.superpoints, 6);
  g.geodesic = geodesic_table(g, 3);
  Eigen::MatrixXd w(10, 10);
  for (int i = 0; i < w.size(); ++i) w.data()[i] = gauss(rng);
  const auto emb = geodesic_embedding(g, cfg, w);
  for (int i = 0; i < 15; ++i)
    for (int s = 0; s < 6; ++s) {
      const auto raw = sinusoidal_embed(g.geodesic(i, s), cfg.sigma_geo, 10);
      for (int c = 0; c < 10; ++c) {
        double acc = 0.0;
        for (int r = 0; r < 10; ++r) acc += raw(r) * w(r, c);
        EXPECT_NEAR(emb.row(i, s)(c), acc, 1e-12);
      }
    }
}

TEST(GeodesicEmbedding, ProjectionShapeMismatchThrows) {
  std::mt19937_64 rng(6);
  EmbeddingConfig cfg;
  cfg.dim = 8;
  try {
    geodesic_embedding(graph_of(random_points(rng, 5), 3), cfg, Eigen::MatrixXd::Identity(6, 6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

}  // namespace
}  // namespace instreg
