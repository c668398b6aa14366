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

#include "instreg/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "instreg/error.hpp"

namespace instreg {
namespace {

constexpr int kAngleReferences = 3;

double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

}  // namespace

void EmbeddingConfig::validate() const {
  if (!(sigma_d > 0.0) || !(sigma_a > 0.0) || !(sigma_geo > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "embedding sigmas must be positive");
  }
  if (dim < 2 || dim % 2 != 0) throw Error(ErrorCode::InvalidArgument, "embedding dim must be even and >= 2");
}

Eigen::RowVectorXd sinusoidal_embed(double value, double sigma, int dim) {
  if (dim < 2 || dim % 2 != 0) throw Error(ErrorCode::InvalidArgument, "sinusoid dim must be even and >= 2");
  Eigen::RowVectorXd out(dim);
  const double x = value / sigma;
  for (int k = 0; 2 * k < dim; ++k) {
    const double arg = x / std::pow(10000.0, static_cast<double>(2 * k) / dim);
    out(2 * k) = std::sin(arg);
    out(2 * k + 1) = std::cos(arg);
  }
  return out;
}

GeometricComponents geometric_structure_components(const SuperpointGraph& graph, const EmbeddingConfig& cfg) {
  cfg.validate();
  const int n = graph.size();
  const int k = graph.k();
  GeometricComponents out{PairEmbedding{n, k, Eigen::MatrixXd(n * k, cfg.dim)},
                          PairEmbedding{n, k, Eigen::MatrixXd::Zero(n * k, cfg.dim)}};
  for (int i = 0; i < n; ++i) {
    const Point3& anchor = graph.superpoints[i];
    for (int s = 0; s < k; ++s) {
      const int nb = graph.neighbor(i, s);
      const Eigen::Vector3d offset = graph.superpoints[nb] - anchor;
      out.distance.row(i, s) = sinusoidal_embed(offset.norm(), cfg.sigma_d, cfg.dim);

      int used = 0;
      for (int r = 1; r < k && used < kAngleReferences; ++r) {
        const int x = graph.neighbor(i, r);
        if (x == nb || x == i) continue;
        const double a = angle_deg(offset, graph.superpoints[x] - anchor);
        const Eigen::RowVectorXd e = sinusoidal_embed(a / cfg.sigma_a, 1.0, cfg.dim);
        if (used == 0) {
          out.angle.row(i, s) = e;
        } else {
          out.angle.row(i, s) = out.angle.row(i, s).cwiseMax(e);
        }
        ++used;
      }
    }
  }
  return out;
}

PairEmbedding geometric_structure_embedding(const SuperpointGraph& graph, const EmbeddingConfig& cfg) {
  GeometricComponents parts = geometric_structure_components(graph, cfg);
  parts.distance.data += parts.angle.data;
  return std::move(parts.distance);
}

PairEmbedding geodesic_sinusoid(const SuperpointGraph& graph, const EmbeddingConfig& cfg) {
  cfg.validate();
  const int n = graph.size();
  const int k = graph.k();
  PairEmbedding emb{n, k, Eigen::MatrixXd(n * k, cfg.dim)};
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < k; ++s) emb.row(i, s) = sinusoidal_embed(graph.geodesic(i, s), cfg.sigma_geo, cfg.dim);
  }
  return emb;
}

PairEmbedding project(const PairEmbedding& emb, const Eigen::MatrixXd& projection) {
  if (projection.rows() != emb.dim()) throw Error(ErrorCode::ShapeMismatch, "projection rows must equal embedding dim");
  return PairEmbedding{emb.anchors, emb.slots, emb.data * projection};
}

PairEmbedding geodesic_embedding(const SuperpointGraph& graph, const EmbeddingConfig& cfg,
                                 const Eigen::MatrixXd& projection) {
  return project(geodesic_sinusoid(graph, cfg), projection);
}

}  // namespace instreg
