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

#include "instreg/attention.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "instreg/error.hpp"

namespace instreg {
namespace {

constexpr double kLayerNormEps = 1e-5;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

void softmax_inplace(std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double s : v) mx = std::max(mx, s);
  double sum = 0.0;
  for (double& s : v) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : v) s /= sum;
}

FeatureMatrix feed_forward(const FeatureMatrix& x, const FeedForwardWeights& w) {
  FeatureMatrix hidden = (x * w.w1).rowwise() + w.b1;
  hidden = hidden.cwiseMax(0.0);
  return (hidden * w.w2).rowwise() + w.b2;
}

FeatureMatrix finish_block(const FeatureMatrix& x, const FeatureMatrix& attended, const BlockWeights& w) {
  const FeatureMatrix x1 = layer_norm(x + attended * w.attention.output, w.norm1);
  return layer_norm(x1 + feed_forward(x1, w.ffn), w.norm2);
}

void check_attention(const AttentionWeights& w, int d, int heads) {
  require(heads >= 1 && d % heads == 0, "model dim must be divisible by head count");
  require(w.query.rows() == d && w.query.cols() == d, "query projection must be d x d");
  require(w.key.rows() == d && w.key.cols() == d, "key projection must be d x d");
  require(w.value.rows() == d && w.value.cols() == d, "value projection must be d x d");
  require(w.output.rows() == d && w.output.cols() == d, "output projection must be d x d");
}

void check_block(const BlockWeights& w, int d, int heads) {
  check_attention(w.attention, d, heads);
  require(w.attention.embedding.rows() == d && w.attention.embedding.cols() == d, "embedding projection must be d x d");
  require(w.norm1.gamma.size() == d && w.norm1.beta.size() == d, "norm1 must have d entries");
  require(w.norm2.gamma.size() == d && w.norm2.beta.size() == d, "norm2 must have d entries");
  require(w.ffn.w1.rows() == d && w.ffn.w2.cols() == d && w.ffn.w1.cols() == w.ffn.w2.rows(),
          "feed-forward shapes inconsistent");
  require(w.ffn.b1.size() == w.ffn.w1.cols() && w.ffn.b2.size() == d, "feed-forward bias shapes inconsistent");
}

BlockWeights zero_block(int d, int hidden) {
  BlockWeights b;
  b.attention.query = Eigen::MatrixXd::Zero(d, d);
  b.attention.key = Eigen::MatrixXd::Zero(d, d);
  b.attention.value = Eigen::MatrixXd::Zero(d, d);
  b.attention.embedding = Eigen::MatrixXd::Zero(d, d);
  b.attention.output = Eigen::MatrixXd::Zero(d, d);
  b.norm1 = {Eigen::RowVectorXd::Ones(d), Eigen::RowVectorXd::Zero(d)};
  b.ffn = {Eigen::MatrixXd::Zero(d, hidden), Eigen::RowVectorXd::Zero(hidden), Eigen::MatrixXd::Zero(hidden, d),
           Eigen::RowVectorXd::Zero(d)};
  b.norm2 = {Eigen::RowVectorXd::Ones(d), Eigen::RowVectorXd::Zero(d)};
  return b;
}

WeightSet zero_weights(int backbone_dim, int model_dim, int heads, int num_iterations) {
  WeightSet w;
  w.backbone_dim = backbone_dim;
  w.model_dim = model_dim;
  w.heads = heads;
  w.ffn_hidden = 2 * model_dim;
  w.input_projection = Eigen::MatrixXd::Zero(backbone_dim, model_dim);
  w.output_projection = Eigen::MatrixXd::Zero(model_dim, model_dim);
  for (int t = 0; t < num_iterations; ++t) {
    IterationWeights it;
    it.geometric = zero_block(model_dim, w.ffn_hidden);
    it.cross = zero_block(model_dim, w.ffn_hidden);
    it.mask.geodesic_attention = zero_block(model_dim, w.ffn_hidden);
    it.mask.geodesic_projection = Eigen::MatrixXd::Zero(model_dim, model_dim);
    it.mask.mlp_w1 = Eigen::MatrixXd::Zero(2 * model_dim, model_dim);
    it.mask.mlp_b1 = Eigen::RowVectorXd::Zero(model_dim);
    it.mask.mlp_w2 = Eigen::MatrixXd::Zero(model_dim, 1);
    w.iterations.push_back(std::move(it));
  }
  return w;
}

void visit_block(const std::string& prefix, BlockWeights& b,
                 const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  auto vec = [&](const std::string& name, Eigen::RowVectorXd& v) {
    Eigen::MatrixXd m = v;
    fn(name, m);
    v = m;
  };
  fn(prefix + "attention.query", b.attention.query);
  fn(prefix + "attention.key", b.attention.key);
  fn(prefix + "attention.value", b.attention.value);
  fn(prefix + "attention.embedding", b.attention.embedding);
  fn(prefix + "attention.output", b.attention.output);
  vec(prefix + "norm1.gamma", b.norm1.gamma);
  vec(prefix + "norm1.beta", b.norm1.beta);
  fn(prefix + "ffn.w1", b.ffn.w1);
  vec(prefix + "ffn.b1", b.ffn.b1);
  fn(prefix + "ffn.w2", b.ffn.w2);
  vec(prefix + "ffn.b2", b.ffn.b2);
  vec(prefix + "norm2.gamma", b.norm2.gamma);
  vec(prefix + "norm2.beta", b.norm2.beta);
}

}  // namespace

InstanceMask InstanceMask::all_allowed(int anchors, int slots) {
  InstanceMask m;
  m.allowed.setConstant(anchors, slots, true);
  m.confidence = Eigen::MatrixXd::Ones(anchors, slots);
  return m;
}

WeightSet WeightSet::random(int backbone_dim, int model_dim, int heads, int num_iterations, std::uint64_t seed) {
  WeightSet w = zero_weights(backbone_dim, model_dim, heads, num_iterations);
  std::mt19937_64 rng(seed);
  w.for_each_tensor([&](const std::string& name, Eigen::MatrixXd& m) {
    const bool is_gamma = name.ends_with(".gamma");
    const bool is_beta = name.ends_with(".beta");
    if (is_gamma) {
      m.setOnes();
      return;
    }
    if (is_beta) {
      m.setZero();
      return;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(model_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  });
  w.validate();
  return w;
}

WeightSet WeightSet::passthrough(int backbone_dim, int model_dim, int heads, int num_iterations) {
  WeightSet w = zero_weights(backbone_dim, model_dim, heads, num_iterations);
  w.input_projection = Eigen::MatrixXd::Identity(backbone_dim, model_dim);
  w.output_projection = Eigen::MatrixXd::Identity(model_dim, model_dim);
  for (auto& it : w.iterations) it.mask.mlp_b2 = 10.0;
  w.validate();
  return w;
}

void WeightSet::validate() const {
  const int d = model_dim;
  require(backbone_dim >= 1 && d >= 2, "dimensions must be positive");
  require(heads >= 1 && d % heads == 0, "model dim must be divisible by head count");
  require(input_projection.rows() == backbone_dim && input_projection.cols() == d, "input projection shape");
  require(output_projection.rows() == d && output_projection.cols() == d, "output projection shape");
  for (const auto& it : iterations) {
    check_block(it.geometric, d, heads);
    check_block(it.cross, d, heads);
    check_block(it.mask.geodesic_attention, d, heads);
    require(it.mask.geodesic_projection.rows() == d && it.mask.geodesic_projection.cols() == d,
            "geodesic projection must be d x d");
    require(it.mask.mlp_w1.rows() == 2 * d && it.mask.mlp_w1.cols() == it.mask.mlp_b1.size(), "mask MLP layer 1 shape");
    require(it.mask.mlp_w2.rows() == it.mask.mlp_w1.cols() && it.mask.mlp_w2.cols() == 1, "mask MLP layer 2 shape");
  }
  bool finite = input_projection.allFinite() && output_projection.allFinite();
  const_cast<WeightSet*>(this)->for_each_tensor(
      [&](const std::string&, Eigen::MatrixXd& m) { finite = finite && m.allFinite(); });
  if (!finite) throw Error(ErrorCode::InvalidArgument, "weights contain non-finite values");
}

void WeightSet::for_each_tensor(const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  fn("input_projection", input_projection);
  fn("output_projection", output_projection);
  for (std::size_t t = 0; t < iterations.size(); ++t) {
    auto& it = iterations[t];
    const std::string prefix = "iter" + std::to_string(t) + ".";
    visit_block(prefix + "geometric.", it.geometric, fn);
    visit_block(prefix + "cross.", it.cross, fn);
    visit_block(prefix + "mask.geodesic_attention.", it.mask.geodesic_attention, fn);
    fn(prefix + "mask.geodesic_projection", it.mask.geodesic_projection);
    fn(prefix + "mask.mlp_w1", it.mask.mlp_w1);
    Eigen::MatrixXd b1 = it.mask.mlp_b1;
    fn(prefix + "mask.mlp_b1", b1);
    it.mask.mlp_b1 = b1;
    fn(prefix + "mask.mlp_w2", it.mask.mlp_w2);
    Eigen::MatrixXd b2 = Eigen::MatrixXd::Constant(1, 1, it.mask.mlp_b2);
    fn(prefix + "mask.mlp_b2", b2);
    it.mask.mlp_b2 = b2(0, 0);
  }
}

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const LayerNormWeights& w) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / n;
    const Eigen::RowVectorXd centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / n;
    out.row(r) = (centered / std::sqrt(var + kLayerNormEps)).cwiseProduct(w.gamma) + w.beta;
  }
  return out;
}

FeatureMatrix local_attention(const FeatureMatrix& x, const Eigen::MatrixXi& neighbors, const PairEmbedding* embedding,
                              const InstanceMask* mask, const AttentionWeights& w, int heads) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  const int k = static_cast<int>(neighbors.cols());
  check_attention(w, d, heads);
  require(neighbors.rows() == n, "neighbor table must have one row per feature row");
  if (embedding) {
    require(embedding->anchors == n && embedding->slots == k, "pair embedding must match the neighbor table");
    require(embedding->dim() == d && w.embedding.rows() == d && w.embedding.cols() == d,
            "pair embedding dim must equal model dim");
  }
  if (mask) require(mask->anchors() == n && mask->slots() == k, "mask must match the neighbor table");

  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const FeatureMatrix q = x * w.query;
  const FeatureMatrix key = x * w.key;
  const FeatureMatrix v = x * w.value;
  FeatureMatrix rw;
  if (embedding) rw = embedding->data * w.embedding;

  FeatureMatrix out = FeatureMatrix::Zero(n, d);
  std::vector<double> scores(k);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < heads; ++h) {
      const auto qh = q.row(i).segment(h * dh, dh);
      for (int s = 0; s < k; ++s) {
        const int nb = neighbors(i, s);
        double e = qh.dot(key.row(nb).segment(h * dh, dh));
        if (embedding) e += qh.dot(rw.row(i * k + s).segment(h * dh, dh));
        e *= scale;
        if (mask && !mask->allowed(i, s)) e += kMaskedScore;
        scores[s] = e;
      }
      softmax_inplace(scores);
      for (int s = 0; s < k; ++s) {
        if (scores[s] == 0.0) continue;
        out.row(i).segment(h * dh, dh) += scores[s] * v.row(neighbors(i, s)).segment(h * dh, dh);
      }
    }
  }
  return out;
}

FeatureMatrix global_attention(const FeatureMatrix& queries, const FeatureMatrix& memory, const AttentionWeights& w,
                               int heads) {
  const int d = static_cast<int>(queries.cols());
  require(memory.cols() == d, "cross-attention sides must share the feature dim");
  require(memory.rows() >= 1, "cross-attention memory must be non-empty");
  check_attention(w, d, heads);
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const FeatureMatrix q = queries * w.query;
  const FeatureMatrix key = memory * w.key;
  const FeatureMatrix v = memory * w.value;

  FeatureMatrix out(queries.rows(), d);
  for (int h = 0; h < heads; ++h) {
    Eigen::MatrixXd s = (q.middleCols(h * dh, dh) * key.middleCols(h * dh, dh).transpose()) * scale;
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double mx = s.row(r).maxCoeff();
      s.row(r) = (s.row(r).array() - mx).exp();
      s.row(r) /= s.row(r).sum();
    }
    out.middleCols(h * dh, dh) = s * v.middleCols(h * dh, dh);
  }
  return out;
}

FeatureMatrix geometric_encoding_block(const FeatureMatrix& features, const SuperpointGraph& graph,
                                       const PairEmbedding& embedding, const InstanceMask* mask,
                                       const BlockWeights& w, int heads) {
  check_block(w, static_cast<int>(features.cols()), heads);
  require(features.rows() == graph.size(), "feature rows must equal superpoint count");
  const FeatureMatrix attended = local_attention(features, graph.knn, &embedding, mask, w.attention, heads);
  return finish_block(features, attended, w);
}

FeatureMatrix cross_attention_block(const FeatureMatrix& feat_a, const FeatureMatrix& feat_b, const BlockWeights& w,
                                    int heads) {
  check_block(w, static_cast<int>(feat_a.cols()), heads);
  const FeatureMatrix attended = global_attention(feat_a, feat_b, w.attention, heads);
  return finish_block(feat_a, attended, w);
}

InstanceMask instance_masking_block(const FeatureMatrix& features, const SuperpointGraph& graph,
                                    const PairEmbedding& geodesic_raw, const InstanceMask& prev_mask,
                                    const MaskHeadWeights& w, int heads, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidArgument, "mask threshold must lie in (0, 1)");
  const int n = graph.size();
  const int k = graph.k();
  const int d = static_cast<int>(features.cols());
  require(w.geodesic_projection.rows() == d && w.mlp_w1.rows() == 2 * d, "mask head shapes must match model dim");

  const PairEmbedding geo = project(geodesic_raw, w.geodesic_projection);
  const FeatureMatrix y = geometric_encoding_block(features, graph, geo, &prev_mask, w.geodesic_attention, heads);

  Eigen::MatrixXd mlp_in(n * k, 2 * d);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < k; ++s) {
      mlp_in.row(i * k + s).head(d) = y.row(graph.neighbor(i, s)) - y.row(i);
      mlp_in.row(i * k + s).tail(d) = geo.row(i, s);
    }
  }
  Eigen::MatrixXd hidden = ((mlp_in * w.mlp_w1).rowwise() + w.mlp_b1).cwiseMax(0.0);
  const Eigen::VectorXd logits = (hidden * w.mlp_w2).col(0).array() + w.mlp_b2;

  InstanceMask out;
  out.allowed.resize(n, k);
  out.confidence.resize(n, k);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < k; ++s) {
      const double u = 1.0 / (1.0 + std::exp(-logits(i * k + s)));
      out.confidence(i, s) = s == 0 ? 1.0 : u;
      out.allowed(i, s) = s == 0 || u >= tau;
    }
  }
  return out;
}

TransformerOutput run_transformer(const FeatureMatrix& f_p, const FeatureMatrix& f_q, const TransformerInputs& in,
                                  const WeightSet& weights, double tau) {
  require(in.graph_p && in.graph_q && in.structure_p && in.structure_q && in.geodesic_q, "missing transformer inputs");
  require(f_p.cols() == weights.backbone_dim && f_q.cols() == weights.backbone_dim,
          "backbone features must match the input projection");
  require(f_p.rows() == in.graph_p->size() && f_q.rows() == in.graph_q->size(),
          "backbone features must have one row per superpoint");

  FeatureMatrix fp = f_p * weights.input_projection;
  FeatureMatrix fq = f_q * weights.input_projection;
  TransformerOutput out;
  out.mask_q = InstanceMask::all_allowed(in.graph_q->size(), in.graph_q->k());
  for (const auto& it : weights.iterations) {
    const FeatureMatrix p_self = geometric_encoding_block(fp, *in.graph_p, *in.structure_p, nullptr, it.geometric,
                                                          weights.heads);
    const FeatureMatrix q_self = geometric_encoding_block(fq, *in.graph_q, *in.structure_q, &out.mask_q, it.geometric,
                                                          weights.heads);
    fp = cross_attention_block(p_self, q_self, it.cross, weights.heads);
    fq = cross_attention_block(q_self, fp, it.cross, weights.heads);
    out.mask_q = instance_masking_block(fq, *in.graph_q, *in.geodesic_q, out.mask_q, it.mask, weights.heads, tau);
    out.mask_history.push_back(out.mask_q);
  }
  out.z_p = fp * weights.output_projection;
  out.z_q = fq * weights.output_projection;
  return out;
}

}  // namespace instreg
