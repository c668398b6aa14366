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
#include <vector>

#include "instreg/geometry.hpp"
#include "instreg/preprocess.hpp"

namespace instreg {

/// Built-in surface models: "chair", "bracket" (no rotational symmetry),
/// "sphere" and "prism" (symmetric). Points are sampled uniformly by area and
/// the result is centered at its centroid. Throws ModelLoadFailure for an unknown id.
Points procedural_model(const std::string& id, std::size_t points, std::uint64_t seed);

bool is_symmetric_model(const std::string& id);

/// A procedural id or a path to a PLY file. PLY models are stride-subsampled
/// to `points` but otherwise used as stored.
Points load_model(const std::string& source, std::size_t points, std::uint64_t seed);

struct SceneSpec {
  std::string model = "chair";
  std::size_t model_points = 1024;
  int min_instances = 4;
  int max_instances = 16;
  double noise_sigma = 0.0;          // per coordinate
  bool noise_relative = false;       // noise_sigma is a fraction of the model diameter
  double occlusion = 0.0;            // fraction of each instance removed by a plane cut
  double background_fraction = 0.2;  // relative to the instance point count
  long background_points = -1;       // overrides background_fraction when >= 0
  double separation = 1.0;           // minimum center distance in diameters
  double label_radius = 0.0;         // background keep-out; 0 means 5% of the diameter
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  std::vector<RigidTransform> poses;
  std::vector<double> visibility;  // retained fraction per instance
  double diameter = 0.0;
  bool symmetric = false;
};

struct Scene {
  Points model;
  PointCloud scene;  // labels: k + 1 for instance k, kBackgroundLabel otherwise
  GroundTruth gt;
};

Scene generate_scene(const SceneSpec& spec);

}  // namespace instreg
