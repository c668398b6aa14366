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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "instreg/embedding.hpp"
#include "instreg/preprocess.hpp"

namespace instreg {

/// One d-vector per superpoint.
using FeatureMatrix = Eigen::MatrixXd;

/// Added to the score of a disallowed slot before the softmax.
inline constexpr double kMaskedScore = -1e9;

/// Per (anchor, slot) neighbor selection. Slot 0 (the anchor itself) is
/// always allowed and carries confidence 1.
struct InstanceMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> allowed;
  Eigen::MatrixXd confidence;

  static InstanceMask all_allowed(int anchors, int slots);
  int anchors() const { return static_cast<int>(allowed.rows()); }
  int slots() const { return static_cast<int>(allowed.cols()); }
  int allowed_count() const { return static_cast<int>(allowed.count()); }
};

/// Multi-head projections. Head h uses columns [h * d_head, (h + 1) * d_head).
struct AttentionWeights {
  Eigen::MatrixXd query;      // d x d
  Eigen::MatrixXd key;        // d x d
  Eigen::MatrixXd value;      // d x d
  Eigen::MatrixXd embedding;  // d x d, projects the pair embedding (unused by cross-attention)
  Eigen::MatrixXd output;     // d x d
};

struct LayerNormWeights {
  Eigen::RowVectorXd gamma;
  Eigen::RowVectorXd beta;
};

struct FeedForwardWeights {
  Eigen::MatrixXd w1;     // d x hidden
  Eigen::RowVectorXd b1;  // hidden
  Eigen::MatrixXd w2;     // hidden x d
  Eigen::RowVectorXd b2;  // d
};

/// attention -> residual -> norm -> feed-forward -> residual -> norm (post-norm).
struct BlockWeights {
  AttentionWeights attention;
  LayerNormWeights norm1;
  FeedForwardWeights ffn;
  LayerNormWeights norm2;
};

struct MaskHeadWeights {
  BlockWeights geodesic_attention;
  Eigen::MatrixXd geodesic_projection;  // d x d
  Eigen::MatrixXd mlp_w1;               // 2d x d
  Eigen::RowVectorXd mlp_b1;            // d
  Eigen::MatrixXd mlp_w2;               // d x 1
  double mlp_b2 = 0.0;
};

struct IterationWeights {
  BlockWeights geometric;  // shared by both clouds
  BlockWeights cross;      // shared by both directions
  MaskHeadWeights mask;
};

struct WeightSet {
  int backbone_dim = 1024;
  int model_dim = 256;
  int heads = 4;
  int ffn_hidden = 512;
  Eigen::MatrixXd input_projection;   // backbone_dim x model_dim
  Eigen::MatrixXd output_projection;  // model_dim x model_dim
  std::vector<IterationWeights> iterations;

  int num_iterations() const { return static_cast<int>(iterations.size()); }
  int head_dim() const { return model_dim / heads; }

  /// Uniform in +-1/sqrt(d) for matrices; layer norms start at gamma = 1, beta = 0.
  static WeightSet random(int backbone_dim, int model_dim, int heads, int num_iterations, std::uint64_t seed);

  /// Identity input/output projections and zeroed residual branches, so the
  /// transformer reduces to repeated layer normalization of the input. The
  /// mask head saturates to "allow everything".
  static WeightSet passthrough(int backbone_dim, int model_dim, int heads, int num_iterations);

  /// Throws ShapeMismatch on inconsistent shapes, InvalidArgument on non-finite values.
  void validate() const;

  /// Visits every tensor in serialization order. Vectors are 1 x n matrices,
  /// the MLP output bias a 1 x 1 matrix.
  void for_each_tensor(const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
};

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const LayerNormWeights& w);

/// Multi-head attention of each anchor over its kNN slots, before the
/// output projection. Scores per head:
///
///   e_ij = (x_i Wq)(x_nj Wk + r_ij Wr)^T / sqrt(d_head) + m_ij
///
/// with m_ij = kMaskedScore for disallowed slots. `embedding` may be null
/// (no geometric term) and `mask` may be null (every slot allowed).
FeatureMatrix local_attention(const FeatureMatrix& x, const Eigen::MatrixXi& neighbors, const PairEmbedding* embedding,
                              const InstanceMask* mask, const AttentionWeights& w, int heads);

/// Multi-head attention of every row of `queries` over all rows of `memory`,
/// before the output projection.
FeatureMatrix global_attention(const FeatureMatrix& queries, const FeatureMatrix& memory, const AttentionWeights& w,
                               int heads);

/// Local attention wrapped with output projection, residuals, norms and feed-forward.
FeatureMatrix geometric_encoding_block(const FeatureMatrix& features, const SuperpointGraph& graph,
                                       const PairEmbedding& embedding, const InstanceMask* mask,
                                       const BlockWeights& w, int heads);

FeatureMatrix cross_attention_block(const FeatureMatrix& feat_a, const FeatureMatrix& feat_b, const BlockWeights& w,
                                    int heads);

/// Geodesic self-attention followed by the confidence MLP and thresholding.
/// `geodesic_raw` is the unprojected geodesic sinusoid.
InstanceMask instance_masking_block(const FeatureMatrix& features, const SuperpointGraph& graph,
                                    const PairEmbedding& geodesic_raw, const InstanceMask& prev_mask,
                                    const MaskHeadWeights& w, int heads, double tau);

struct TransformerInputs {
  const SuperpointGraph* graph_p = nullptr;
  const SuperpointGraph* graph_q = nullptr;
  const PairEmbedding* structure_p = nullptr;  // geometric structure embedding of P
  const PairEmbedding* structure_q = nullptr;  // geometric structure embedding of Q
  const PairEmbedding* geodesic_q = nullptr;   // unprojected geodesic sinusoid of Q
};

struct TransformerOutput {
  FeatureMatrix z_p;
  FeatureMatrix z_q;
  InstanceMask mask_q;
  std::vector<InstanceMask> mask_history;  // one per iteration
};

TransformerOutput run_transformer(const FeatureMatrix& f_p, const FeatureMatrix& f_q, const TransformerInputs& in,
                                  const WeightSet& weights, double tau);

}  // namespace instreg
