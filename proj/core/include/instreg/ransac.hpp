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
#include <span>
#include <vector>

#include "instreg/geometry.hpp"

namespace instreg {

struct RansacConfig {
  double tau2 = 0.05;
  int max_models = 32;
  int iterations = 2000;  // hypotheses per model
  std::uint64_t seed = 0;

  void validate() const;
};

/// Fits one model at a time: 3-point hypotheses scored by tau2-inlier count
/// over the remaining correspondences, refit on the winner's inliers, which
/// are then removed. Stops when the best count drops below three.
std::vector<RigidTransform> sequential_ransac(std::span<const Correspondence> corrs, const RansacConfig& cfg);

}  // namespace instreg
