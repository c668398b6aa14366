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

#include <iosfwd>
#include <string>
#include <vector>

#include "instreg/attention.hpp"
#include "instreg/geometry.hpp"
#include "instreg/preprocess.hpp"
#include "instreg/scene.hpp"

namespace instreg {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// ASCII or binary_little_endian PLY. Reads x/y/z and, when present, an
/// integer `instance` property as labels. Other properties and elements are skipped.
PointCloud read_ply(std::istream& in);
PointCloud read_ply(const std::string& path);

/// Writes float x/y/z and, for labeled clouds, an int `instance` property.
void write_ply(std::ostream& out, const PointCloud& cloud, bool binary);
void write_ply(const std::string& path, const PointCloud& cloud, bool binary = false);

/// Weights: a JSON manifest plus one float32 little-endian blob holding every
/// tensor row-major, concatenated in manifest order. The blob is written next
/// to the manifest as `<manifest stem>.bin`.
void save_weights(const std::string& manifest_path, const WeightSet& weights);
WeightSet load_weights(const std::string& manifest_path);

struct PoseRecord {
  RigidTransform pose;
  int inlier_count = 0;
  double inlier_ratio = 0.0;
};

/// [{"rotation": [9 row-major], "translation": [3], "inlier_count": n, "inlier_ratio": r}, ...]
std::string poses_to_json(const std::vector<PoseRecord>& poses);
std::vector<PoseRecord> poses_from_json(const std::string& text);

struct GroundTruthFile {
  std::string model;
  std::size_t model_points = 0;
  std::uint64_t seed = 0;
  GroundTruth gt;
};

std::string ground_truth_to_json(const GroundTruthFile& file);
GroundTruthFile ground_truth_from_json(const std::string& text);

}  // namespace instreg
