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

#include <Eigen/Core>

#include "instreg/preprocess.hpp"

namespace instreg {

struct EmbeddingConfig {
  double sigma_d = 0.2;     // meters
  double sigma_a = 15.0;    // degrees
  double sigma_geo = 0.1;   // meters
  int dim = 256;

  /// Throws InvalidArgument unless all sigmas are positive and dim is even and >= 2.
  void validate() const;
};

/// One `dim`-vector per (anchor, neighbor slot); row `anchor * slots + slot`.
struct PairEmbedding {
  int anchors = 0;
  int slots = 0;
  Eigen::MatrixXd data;

  int dim() const { return static_cast<int>(data.cols()); }
  auto row(int anchor, int slot) { return data.row(anchor * slots + slot); }
  auto row(int anchor, int slot) const { return data.row(anchor * slots + slot); }
};

/// entry 2k   = sin((value / sigma) / 10000^(2k / dim))
/// entry 2k+1 = cos((value / sigma) / 10000^(2k / dim))
Eigen::RowVectorXd sinusoidal_embed(double value, double sigma, int dim);

/// Rigid-invariant pair embedding fed to the geometric encoding block.
///
/// For anchor i and slot j (neighbor n = knn(i, j)) the embedding is
///
///   sin_embed(|p_n - p_i|, sigma_d) + max_x sin_embed(angle_deg(p_n - p_i, p_x - p_i) / sigma_a, 1)
///
/// where x ranges over the first three kNN entries of i other than i and n,
/// and the max is elementwise. An empty reference set contributes zeros.
/// Each component lies in [-1, 1], so the sum lies in [-2, 2].
PairEmbedding geometric_structure_embedding(const SuperpointGraph& graph, const EmbeddingConfig& cfg);

struct GeometricComponents {
  PairEmbedding distance;
  PairEmbedding angle;
};

/// The two summands of geometric_structure_embedding, kept apart.
GeometricComponents geometric_structure_components(const SuperpointGraph& graph, const EmbeddingConfig& cfg);

/// Sinusoid of the geodesic distance, before projection.
PairEmbedding geodesic_sinusoid(const SuperpointGraph& graph, const EmbeddingConfig& cfg);

/// Sinusoid of the geodesic distance times `projection` (dim x dim).
PairEmbedding geodesic_embedding(const SuperpointGraph& graph, const EmbeddingConfig& cfg,
                                 const Eigen::MatrixXd& projection);

/// Right-multiplies every pair vector by `projection`.
PairEmbedding project(const PairEmbedding& emb, const Eigen::MatrixXd& projection);

}  // namespace instreg
