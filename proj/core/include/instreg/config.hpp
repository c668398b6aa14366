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
#include <string>

#include "instreg/embedding.hpp"
#include "instreg/features.hpp"
#include "instreg/matching.hpp"
#include "instreg/metrics.hpp"
#include "instreg/ransac.hpp"
#include "instreg/scene.hpp"
#include "instreg/selection.hpp"

namespace instreg {

struct PreprocessConfig {
  double base_voxel = 0.025;
  int stages = 4;
  int k = 16;
  int geodesic_k = 8;  // neighbors joined by geodesic path edges, self included
};

struct TransformerConfig {
  int model_dim = 256;
  int heads = 4;
  int iterations = 3;
  double tau = 0.6;
  std::string init = "random";  // "random" or "passthrough" when no weights file is given
  std::uint64_t seed = 0;
};

struct MatchingConfig {
  int superpoint_matches = 128;
  int candidate_cap = 512;
  SinkhornConfig sinkhorn;
};

/// Which mask drives candidate expansion: the transformer's prediction, one
/// derived from ground-truth labels, or no filtering at all.
enum class MaskSource { Predicted, GroundTruth, All };

struct PipelineConfig {
  std::string preset = "scan2cad";
  PreprocessConfig preprocess;
  EmbeddingConfig embedding;  // dim follows transformer.model_dim
  TransformerConfig transformer;
  MatchingConfig matching;
  SelectionConfig selection;  // diameter is taken from the model at run time
  Thresholds evaluation;
  RansacConfig ransac;
  OracleFeatureConfig features;
  MaskSource mask_source = MaskSource::Predicted;
  bool run_baseline = false;

  void validate() const;
};

/// "scan2cad" (meter-scale furniture) or "robi" (industrial parts). Throws ConfigError otherwise.
PipelineConfig preset_config(const std::string& name);

/// Starts from the preset named by the optional "preset" key, then applies
/// every other key as an override. Unknown keys and ill-typed values throw ConfigError.
PipelineConfig parse_config(const std::string& json_text);

std::string config_to_json(const PipelineConfig& cfg);

/// Reads a SceneSpec from {"model", "model_points", "min_instances",
/// "max_instances", "noise_sigma", "noise_relative", "occlusion",
/// "background_fraction", "background_points", "separation",
/// "label_radius", "seed"}; omitted keys keep their defaults.
SceneSpec parse_scene_spec(const std::string& json_text);

std::string to_string(MaskSource source);
MaskSource mask_source_from_string(const std::string& name);

}  // namespace instreg
