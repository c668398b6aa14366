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

#include "instreg/attention.hpp"
#include "instreg/preprocess.hpp"
#include "instreg/scene.hpp"

namespace instreg {

/// Point-level features for the dense levels and superpoint-level features
/// for the coarse levels of both clouds.
struct FeatureBundle {
  FeatureMatrix point_p;
  FeatureMatrix point_q;
  FeatureMatrix super_p;
  FeatureMatrix super_q;
};

using FeatureProvider = std::function<FeatureBundle(const PreparedCloud& model, const PreparedCloud& scene)>;

struct OracleFeatureConfig {
  double inlier_rate = 0.5;
  int dim = 32;
  double noise = 0.0;       // extra per-entry Gaussian noise on top of the calibrated level
  double bandwidth = 0.35;  // superpoint feature length scale, in model diameters
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stand-in for a learned backbone, built from ground truth.
///
/// Model dense points carry i.i.d. Gaussian features. A labeled scene point
/// gets the feature of the model point nearest to its position mapped back
/// through its instance pose, plus Gaussian noise at the level returned by
/// calibrated_feature_noise. At rate 0 instance points get fresh features.
/// Superpoints use a smooth random-Fourier encoding of model-frame position;
/// with probability `inlier_rate` a scene superpoint gets its own encoding,
/// otherwise that of a uniformly drawn model superpoint. Background points and
/// superpoints get fresh random features.
FeatureBundle oracle_features(const PreparedCloud& model, const PreparedCloud& scene, const GroundTruth& gt,
                              const OracleFeatureConfig& cfg);

/// Per-entry noise sigma at which mutual top-1 dot-product matching between
/// `n_model` i.i.d. N(0, 1) features of width `dim` and their noisy copies has
/// inlier ratio `inlier_rate`. Found by bisection on a fixed-seed sample and
/// cached. Returns 0 at rate 1 and infinity at rate 0.
double calibrated_feature_noise(double inlier_rate, int dim, int n_model);

/// Inlier ratio of mutual top-1 matching on the calibration sample at `sigma`.
double mutual_top1_inlier_ratio(double sigma, int dim, int n_model, std::uint64_t seed);

}  // namespace instreg
