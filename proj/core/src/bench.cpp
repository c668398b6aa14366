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

#include "instreg/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "instreg/error.hpp"
#include "instreg/pipeline.hpp"
#include "json_section.hpp"

namespace instreg {
namespace {

using detail::json;
using detail::Section;

constexpr int kOverlapBins = 10;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct OverlapTally {
  int instances = 0;
  int registered = 0;
};

}  // namespace

const char* const kBenchCsvHeader =
    "kind,method,noise,occlusion,inlier_rate,overlap_bin,scenes,instances,MR,MP,MF,IR,mIoU,runtime_s";

BenchConfig parse_bench_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed bench JSON: ") + e.what());
  }
  BenchConfig cfg;
  Section top(root, "bench");
  if (const json* p = top.child("pipeline")) cfg.pipeline = parse_config(p->dump());
  if (const json* s = top.child("scene")) {
    Section sec(*s, "bench.scene");
    sec.read("model", cfg.scene.model);
    sec.read("model_points", cfg.scene.model_points);
    sec.read("min_instances", cfg.scene.min_instances);
    sec.read("max_instances", cfg.scene.max_instances);
    sec.read("background_fraction", cfg.scene.background_fraction);
    sec.read("background_points", cfg.scene.background_points);
    sec.read("separation", cfg.scene.separation);
    sec.read("label_radius", cfg.scene.label_radius);
    sec.finish();
  }
  top.read("noise", cfg.noise);
  top.read("occlusion", cfg.occlusion);
  top.read("inlier_rate", cfg.inlier_rate);
  top.read("scenes", cfg.scenes);
  top.read("seed", cfg.seed);
  top.finish();
  if (cfg.scenes < 1) throw Error(ErrorCode::ConfigError, "bench.scenes must be >= 1");
  if (cfg.noise.empty() || cfg.occlusion.empty() || cfg.inlier_rate.empty()) {
    throw Error(ErrorCode::ConfigError, "bench sweeps must list at least one value each");
  }
  return cfg;
}

std::string run_bench(const BenchConfig& cfg) {
  cfg.pipeline.validate();
  const bool baseline = cfg.pipeline.run_baseline;
  const WeightSet weights = make_weights(cfg.pipeline, cfg.pipeline.features.dim);
  std::ostringstream csv;
  csv << kBenchCsvHeader << "\n";
  std::vector<OverlapTally> tally_pipe(kOverlapBins), tally_base(kOverlapBins);
  int total_scenes = 0;

  std::uint64_t scene_counter = 0;
  for (double noise : cfg.noise) {
    for (double occ : cfg.occlusion) {
      for (double rate : cfg.inlier_rate) {
        std::vector<MetricsReport> pipe, base;
        for (int s = 0; s < cfg.scenes; ++s) {
          SceneSpec spec = cfg.scene;
          spec.noise_sigma = noise;
          spec.noise_relative = true;
          spec.occlusion = occ;
          spec.seed = cfg.seed * 1000003ULL + scene_counter++;
          PipelineConfig pc = cfg.pipeline;
          pc.features.inlier_rate = rate;
          const RegistrationReport rep = run_synthetic(spec, pc, weights);
          pipe.push_back(*rep.metrics);
          if (baseline) base.push_back(*rep.baseline);

          auto record = [&](const MetricsReport& m, std::vector<OverlapTally>& tally) {
            std::vector<char> hit(m.num_gt, 0);
            for (const auto& x : m.matches) hit[x.gt] = 1;
            for (int g = 0; g < m.num_gt; ++g) {
              const double vis = rep.ground_truth->visibility[g];
              const int bin = std::clamp(static_cast<int>(std::floor(vis * kOverlapBins)), 0, kOverlapBins - 1);
              ++tally[bin].instances;
              tally[bin].registered += hit[g];
            }
          };
          record(*rep.metrics, tally_pipe);
          if (baseline) record(*rep.baseline, tally_base);
          ++total_scenes;
        }
        auto row = [&](const char* method, const std::vector<MetricsReport>& reports) {
          const Aggregate a = aggregate(reports);
          csv << "setting," << method << ',' << fmt(noise) << ',' << fmt(occ) << ',' << fmt(rate) << ",all,"
              << a.scenes << ',' << a.instances << ',' << fmt(a.mr) << ',' << fmt(a.mp) << ',' << fmt(a.mf) << ','
              << fmt(a.ir) << ',' << fmt(a.miou) << ',' << fmt(a.runtime_s) << "\n";
        };
        row("pipeline", pipe);
        if (baseline) row("ransac", base);
      }
    }
  }

  auto overlap_rows = [&](const char* method, const std::vector<OverlapTally>& tally) {
    for (int b = 0; b < kOverlapBins; ++b) {
      if (tally[b].instances == 0) continue;
      char bin[32];
      std::snprintf(bin, sizeof(bin), "%.1f-%.1f", b / 10.0, (b + 1) / 10.0);
      const double mr = static_cast<double>(tally[b].registered) / tally[b].instances;
      csv << "overlap," << method << ",all,all,all," << bin << ',' << total_scenes << ',' << tally[b].instances << ','
          << fmt(mr) << ",,,,,\n";
    }
  };
  overlap_rows("pipeline", tally_pipe);
  if (baseline) overlap_rows("ransac", tally_base);
  return csv.str();
}

}  // namespace instreg
