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

#include "instreg/pipeline.hpp"

#include <chrono>

#include "instreg/embedding.hpp"
#include "instreg/error.hpp"
#include "instreg/matching.hpp"
#include "instreg/ransac.hpp"

namespace instreg {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

WeightSet make_weights(const PipelineConfig& cfg, int backbone_dim) {
  const auto& t = cfg.transformer;
  if (t.init == "passthrough") return WeightSet::passthrough(backbone_dim, t.model_dim, t.heads, t.iterations);
  return WeightSet::random(backbone_dim, t.model_dim, t.heads, t.iterations, t.seed);
}

RegistrationReport run_pipeline(const Points& model, const PointCloud& scene, const FeatureProvider& features,
                                const WeightSet& weights, const PipelineConfig& cfg, const GroundTruth* gt) {
  cfg.validate();
  weights.validate();
  if (model.empty()) throw Error(ErrorCode::EmptyModel, "model has no points");
  const auto start = Clock::now();
  RegistrationReport rep;

  const auto& pre = cfg.preprocess;
  const PreparedCloud prep_p = prepare_cloud(PointCloud{model, {}}, pre.base_voxel, pre.stages, pre.k, pre.geodesic_k);
  const PreparedCloud prep_q = prepare_cloud(scene, pre.base_voxel, pre.stages, pre.k, pre.geodesic_k);
  rep.model_superpoints = prep_p.graph.size();
  rep.scene_superpoints = prep_q.graph.size();

  const FeatureBundle feats = features(prep_p, prep_q);
  if (feats.super_p.rows() != prep_p.graph.size() || feats.super_q.rows() != prep_q.graph.size() ||
      feats.point_p.rows() != static_cast<Eigen::Index>(prep_p.dense.size()) ||
      feats.point_q.rows() != static_cast<Eigen::Index>(prep_q.dense.size())) {
    throw Error(ErrorCode::ShapeMismatch, "feature provider returned the wrong number of rows");
  }

  EmbeddingConfig emb = cfg.embedding;
  emb.dim = weights.model_dim;
  const PairEmbedding structure_p = geometric_structure_embedding(prep_p.graph, emb);
  const PairEmbedding structure_q = geometric_structure_embedding(prep_q.graph, emb);
  const PairEmbedding geodesic_q = geodesic_sinusoid(prep_q.graph, emb);
  const TransformerInputs inputs{&prep_p.graph, &prep_q.graph, &structure_p, &structure_q, &geodesic_q};
  const TransformerOutput tf = run_transformer(feats.super_p, feats.super_q, inputs, weights, cfg.transformer.tau);
  rep.predicted_mask = tf.mask_q;

  std::optional<InstanceMask> gt_mask;
  if (prep_q.dense.has_labels()) {
    gt_mask = ground_truth_mask(prep_q.graph, superpoint_labels(prep_q.graph, prep_q.dense.labels));
  }
  InstanceMask expansion_mask;
  switch (cfg.mask_source) {
    case MaskSource::Predicted: expansion_mask = tf.mask_q; break;
    case MaskSource::All: expansion_mask = InstanceMask::all_allowed(prep_q.graph.size(), prep_q.graph.k()); break;
    case MaskSource::GroundTruth:
      if (!gt_mask) throw Error(ErrorCode::InvalidArgument, "a ground-truth mask needs a labeled scene");
      expansion_mask = *gt_mask;
      break;
  }

  const auto seeds = superpoint_match(tf.z_p, tf.z_q, cfg.matching.superpoint_matches);
  std::vector<PoseHypothesis> hyps;
  std::vector<const std::vector<PointMatch>*> lists;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    InstanceCandidate cand = expand_candidate(seeds[r], prep_p.graph, prep_q.graph, prep_p.dense.points,
                                              prep_q.dense.points, expansion_mask, cfg.matching.candidate_cap);
    cand.seed_rank = static_cast<int>(r);
    match_candidate(cand, feats.point_p, feats.point_q, cfg.matching.sinkhorn);
    ++rep.candidates;
    try {
      candidate_pose(cand, prep_p.dense.points, prep_q.dense.points);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewCorrespondences && e.code() != ErrorCode::DegenerateConfiguration) throw;
      continue;
    }
    ++rep.posed_candidates;
    hyps.push_back({*cand.pose, std::move(cand.point_corrs), 0.0, 0, cand.seed_rank});
  }
  for (const auto& h : hyps) lists.push_back(&h.corrs);
  rep.global_matches = merge_matches(lists);
  rep.global_corrs = to_correspondences(rep.global_matches, prep_p.dense.points, prep_q.dense.points);

  SelectionConfig sel = cfg.selection;
  sel.diameter = gt && gt->diameter > 0.0 ? gt->diameter : diameter(subsample_stride(model, 2048));
  rep.registrations = nms_select(std::move(hyps), rep.global_corrs, sel, prep_p.dense.points, prep_p.dense.points,
                                 prep_q.dense.points);
  rep.runtime_s = seconds_since(start);

  if (gt) {
    std::vector<RigidTransform> poses;
    for (const auto& h : rep.registrations) poses.push_back(h.pose);
    const double ir =
        rep.global_corrs.empty() ? 0.0 : inlier_ratio_metric(rep.global_corrs, gt->poses, cfg.evaluation.tau1);
    const double miou = gt_mask ? mask_miou(tf.mask_q, *gt_mask) : 0.0;
    rep.metrics = evaluate(poses, gt->poses, model, sel.diameter, cfg.evaluation, gt->symmetric);
    rep.metrics->inlier_ratio = ir;
    rep.metrics->miou = miou;
    rep.metrics->runtime_s = rep.runtime_s;

    if (cfg.run_baseline) {
      const auto base_start = Clock::now();
      rep.baseline_poses = sequential_ransac(rep.global_corrs, cfg.ransac);
      rep.baseline = evaluate(rep.baseline_poses, gt->poses, model, sel.diameter, cfg.evaluation, gt->symmetric);
      rep.baseline->inlier_ratio = ir;
      rep.baseline->miou = miou;
      rep.baseline->runtime_s = seconds_since(base_start);
    }
  }
  return rep;
}

RegistrationReport run_synthetic(const SceneSpec& spec, const PipelineConfig& cfg, const WeightSet& weights) {
  const Scene scene = generate_scene(spec);
  OracleFeatureConfig fcfg = cfg.features;
  fcfg.seed = cfg.features.seed ^ (spec.seed * 0x9e3779b97f4a7c15ULL);
  const GroundTruth& gt = scene.gt;
  const FeatureProvider provider = [&](const PreparedCloud& p, const PreparedCloud& q) {
    return oracle_features(p, q, gt, fcfg);
  };
  PipelineConfig run_cfg = cfg;
  run_cfg.ransac.seed = cfg.ransac.seed ^ spec.seed;
  RegistrationReport rep = run_pipeline(scene.model, scene.scene, provider, weights, run_cfg, &scene.gt);
  rep.ground_truth = scene.gt;
  return rep;
}

}  // namespace instreg
