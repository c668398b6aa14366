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

#include "instreg/config.hpp"
#include "instreg/scene.hpp"

namespace instreg {

struct BenchConfig {
  PipelineConfig pipeline;
  SceneSpec scene;                        // noise, occlusion and seed are overridden per run
  std::vector<double> noise{0.005};       // fractions of the model diameter
  std::vector<double> occlusion{0.3};
  std::vector<double> inlier_rate{0.5};
  int scenes = 10;
  std::uint64_t seed = 1;
};

/// Parses {"pipeline": {...}, "scene": {...}, "noise": [...], "occlusion": [...],
/// "inlier_rate": [...], "scenes": n, "seed": s}. Unknown keys throw ConfigError.
BenchConfig parse_bench_config(const std::string& json_text);

/// Header of the bench CSV; runtime_s is always the last column.
extern const char* const kBenchCsvHeader;

/// One "setting" row per (noise, occlusion, inlier_rate, method) and one
/// "overlap" row per (method, visibility decile) holding the recall of the
/// instances in that decile across the whole sweep. Methods are "pipeline"
/// and, when the pipeline config enables the baseline, "ransac".
std::string run_bench(const BenchConfig& cfg);

}  // namespace instreg
