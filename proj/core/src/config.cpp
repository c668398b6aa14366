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

#include "instreg/config.hpp"

#include "instreg/error.hpp"
#include "json_section.hpp"

namespace instreg {
namespace {

using nlohmann::json;
using detail::Section;
using detail::with_section;

}  // namespace

std::string to_string(MaskSource source) {
  switch (source) {
    case MaskSource::Predicted: return "predicted";
    case MaskSource::GroundTruth: return "ground_truth";
    case MaskSource::All: return "all";
  }
  return "predicted";
}

MaskSource mask_source_from_string(const std::string& name) {
  if (name == "predicted") return MaskSource::Predicted;
  if (name == "ground_truth") return MaskSource::GroundTruth;
  if (name == "all") return MaskSource::All;
  throw Error(ErrorCode::ConfigError, "mask_source must be predicted, ground_truth or all");
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (!(preprocess.base_voxel > 0.0)) fail("preprocess.base_voxel must be > 0");
  if (preprocess.stages < 2) fail("preprocess.stages must be >= 2");
  if (preprocess.k < 1) fail("preprocess.k must be >= 1");
  if (preprocess.geodesic_k < 2) fail("preprocess.geodesic_k must be >= 2");
  if (transformer.model_dim < 2 || transformer.model_dim % 2 != 0) fail("transformer.model_dim must be even");
  if (transformer.heads < 1 || transformer.model_dim % transformer.heads != 0) {
    fail("transformer.heads must divide transformer.model_dim");
  }
  if (transformer.iterations < 0) fail("transformer.iterations must be >= 0");
  if (!(transformer.tau > 0.0 && transformer.tau < 1.0)) fail("transformer.tau must lie in (0, 1)");
  if (transformer.init != "random" && transformer.init != "passthrough") {
    fail("transformer.init must be random or passthrough");
  }
  if (matching.superpoint_matches < 1) fail("matching.superpoint_matches must be >= 1");
  if (matching.candidate_cap < 1) fail("matching.candidate_cap must be >= 1");
  try {
    EmbeddingConfig e = embedding;
    e.dim = transformer.model_dim;
    e.validate();
    matching.sinkhorn.validate();
    SelectionConfig s = selection;
    s.diameter = 1.0;
    s.validate();
    evaluation.validate();
    ransac.validate();
    features.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

PipelineConfig preset_config(const std::string& name) {
  PipelineConfig c;
  c.preset = name;
  if (name == "scan2cad") {
    return c;
  }
  if (name == "robi") {
    c.preprocess.base_voxel = 0.0015;
    c.preprocess.k = 32;
    c.embedding.sigma_d = 0.02;
    c.embedding.sigma_geo = 0.01;
    c.selection.tau2 = 0.003;
    c.selection.tau_s = 0.7;
    c.selection.tau3 = 0.2;
    c.evaluation.rte = 0.006;
    c.evaluation.tau1 = 0.005;
    c.ransac.tau2 = 0.003;
    return c;
  }
  throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
}

PipelineConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config JSON: ") + e.what());
  }
  Section top(root, "config");
  std::string preset = "scan2cad";
  top.read("preset", preset);
  PipelineConfig c = preset_config(preset);

  with_section(top, "preprocess", "config", [&](Section& s) {
    s.read("base_voxel", c.preprocess.base_voxel);
    s.read("stages", c.preprocess.stages);
    s.read("k", c.preprocess.k);
    s.read("geodesic_k", c.preprocess.geodesic_k);
  });
  with_section(top, "embedding", "config", [&](Section& s) {
    s.read("sigma_d", c.embedding.sigma_d);
    s.read("sigma_a", c.embedding.sigma_a);
    s.read("sigma_geo", c.embedding.sigma_geo);
  });
  with_section(top, "transformer", "config", [&](Section& s) {
    s.read("model_dim", c.transformer.model_dim);
    s.read("heads", c.transformer.heads);
    s.read("iterations", c.transformer.iterations);
    s.read("tau", c.transformer.tau);
    s.read("init", c.transformer.init);
    s.read("seed", c.transformer.seed);
  });
  with_section(top, "matching", "config", [&](Section& s) {
    s.read("superpoint_matches", c.matching.superpoint_matches);
    s.read("candidate_cap", c.matching.candidate_cap);
    s.read("sinkhorn_iterations", c.matching.sinkhorn.iterations);
    s.read("mutual_k", c.matching.sinkhorn.mutual_k);
    s.read("dustbin_score", c.matching.sinkhorn.dustbin_score);
  });
  with_section(top, "selection", "config", [&](Section& s) {
    s.read("tau2", c.selection.tau2);
    s.read("tau_s", c.selection.tau_s);
    s.read("tau3", c.selection.tau3);
    s.read("refine_iters", c.selection.refine_iters);
    s.read("similarity_points", c.selection.similarity_points);
  });
  with_section(top, "evaluation", "config", [&](Section& s) {
    s.read("rre_deg", c.evaluation.rre_deg);
    s.read("rte", c.evaluation.rte);
    s.read("adds_fraction", c.evaluation.adds_fraction);
    s.read("tau1", c.evaluation.tau1);
  });
  with_section(top, "ransac", "config", [&](Section& s) {
    s.read("tau2", c.ransac.tau2);
    s.read("max_models", c.ransac.max_models);
    s.read("iterations", c.ransac.iterations);
    s.read("seed", c.ransac.seed);
  });
  with_section(top, "features", "config", [&](Section& s) {
    s.read("inlier_rate", c.features.inlier_rate);
    s.read("dim", c.features.dim);
    s.read("noise", c.features.noise);
    s.read("bandwidth", c.features.bandwidth);
    s.read("seed", c.features.seed);
  });
  std::string mask = to_string(c.mask_source);
  top.read("mask_source", mask);
  c.mask_source = mask_source_from_string(mask);
  top.read("run_baseline", c.run_baseline);
  top.finish();
  c.embedding.dim = c.transformer.model_dim;
  c.validate();
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  const json j = {
      {"preset", c.preset},
      {"preprocess", {{"base_voxel", c.preprocess.base_voxel}, {"stages", c.preprocess.stages}, {"k", c.preprocess.k},
                      {"geodesic_k", c.preprocess.geodesic_k}}},
      {"embedding",
       {{"sigma_d", c.embedding.sigma_d}, {"sigma_a", c.embedding.sigma_a}, {"sigma_geo", c.embedding.sigma_geo}}},
      {"transformer",
       {{"model_dim", c.transformer.model_dim},
        {"heads", c.transformer.heads},
        {"iterations", c.transformer.iterations},
        {"tau", c.transformer.tau},
        {"init", c.transformer.init},
        {"seed", c.transformer.seed}}},
      {"matching",
       {{"superpoint_matches", c.matching.superpoint_matches},
        {"candidate_cap", c.matching.candidate_cap},
        {"sinkhorn_iterations", c.matching.sinkhorn.iterations},
        {"mutual_k", c.matching.sinkhorn.mutual_k},
        {"dustbin_score", c.matching.sinkhorn.dustbin_score}}},
      {"selection",
       {{"tau2", c.selection.tau2},
        {"tau_s", c.selection.tau_s},
        {"tau3", c.selection.tau3},
        {"refine_iters", c.selection.refine_iters},
        {"similarity_points", c.selection.similarity_points}}},
      {"evaluation",
       {{"rre_deg", c.evaluation.rre_deg},
        {"rte", c.evaluation.rte},
        {"adds_fraction", c.evaluation.adds_fraction},
        {"tau1", c.evaluation.tau1}}},
      {"ransac",
       {{"tau2", c.ransac.tau2},
        {"max_models", c.ransac.max_models},
        {"iterations", c.ransac.iterations},
        {"seed", c.ransac.seed}}},
      {"features",
       {{"inlier_rate", c.features.inlier_rate},
        {"dim", c.features.dim},
        {"noise", c.features.noise},
        {"bandwidth", c.features.bandwidth},
        {"seed", c.features.seed}}},
      {"mask_source", to_string(c.mask_source)},
      {"run_baseline", c.run_baseline},
  };
  return j.dump(2) + "\n";
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed scene JSON: ") + e.what());
  }
  SceneSpec spec;
  Section sec(root, "scene");
  sec.read("model", spec.model);
  sec.read("model_points", spec.model_points);
  sec.read("min_instances", spec.min_instances);
  sec.read("max_instances", spec.max_instances);
  sec.read("noise_sigma", spec.noise_sigma);
  sec.read("noise_relative", spec.noise_relative);
  sec.read("occlusion", spec.occlusion);
  sec.read("background_fraction", spec.background_fraction);
  sec.read("background_points", spec.background_points);
  sec.read("separation", spec.separation);
  sec.read("label_radius", spec.label_radius);
  sec.read("seed", spec.seed);
  sec.finish();
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return spec;
}

}  // namespace instreg
