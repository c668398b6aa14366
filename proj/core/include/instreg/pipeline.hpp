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

#include <optional>
#include <vector>

#include "instreg/config.hpp"
#include "instreg/features.hpp"
#include "instreg/metrics.hpp"
#include "instreg/scene.hpp"
#include "instreg/selection.hpp"

namespace instreg {

struct RegistrationReport {
  std::vector<PoseHypothesis> registrations;
  std::vector<PointMatch> global_matches;  // dense (model, scene) indices
  std::vector<Correspondence> global_corrs;
  InstanceMask predicted_mask;
  int model_superpoints = 0;
  int scene_superpoints = 0;
  int candidates = 0;
  int posed_candidates = 0;
  std::optional<MetricsReport> metrics;   // only with ground truth
  std::optional<MetricsReport> baseline;  // sequential RANSAC on global_corrs, only with ground truth
  std::vector<RigidTransform> baseline_poses;
  std::optional<GroundTruth> ground_truth;  // filled by run_synthetic
  double runtime_s = 0.0;
};

/// Weights for `cfg.transformer`, seeded or passthrough, taking features of width `backbone_dim`.
WeightSet make_weights(const PipelineConfig& cfg, int backbone_dim);

/// Preprocess, embed, run the transformer, match superpoints, expand and
/// match candidates, select. With ground truth the report also carries
/// metrics, and the RANSAC baseline when `cfg.run_baseline` is set. A
/// ground-truth mask source needs a labeled scene.
RegistrationReport run_pipeline(const Points& model, const PointCloud& scene, const FeatureProvider& features,
                                const WeightSet& weights, const PipelineConfig& cfg, const GroundTruth* gt = nullptr);

/// Generates the scene, builds oracle features seeded from the scene seed and runs the pipeline.
RegistrationReport run_synthetic(const SceneSpec& spec, const PipelineConfig& cfg, const WeightSet& weights);

}  // namespace instreg
