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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "instreg/bench.hpp"
#include "instreg/config.hpp"
#include "instreg/error.hpp"
#include "instreg/io.hpp"
#include "instreg/metrics.hpp"
#include "instreg/pipeline.hpp"
#include "instreg/scene.hpp"
#include "instreg_oracle/oracle.hpp"

namespace {

using nlohmann::json;
using namespace instreg;

constexpr const char* kMetricsCsvHeader =
    "scene,num_gt,num_pred,num_registered,recall,precision,f1,inlier_ratio,miou,runtime_s";

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

PipelineConfig load_config(const std::string& path, const std::string& preset) {
  if (!path.empty()) return parse_config(read_text_file(path));
  return preset_config(preset);
}

struct GenerateArgs {
  std::string spec;
  std::string scene_out;
  std::string gt_out;
  std::string model_out;
  bool binary = false;
};

int run_generate(const GenerateArgs& a) {
  const SceneSpec spec = parse_scene_spec(read_text_file(a.spec));
  const Scene scene = generate_scene(spec);
  write_ply(a.scene_out, scene.scene, a.binary);
  write_text_file(a.gt_out, ground_truth_to_json({spec.model, spec.model_points, spec.seed, scene.gt}));
  if (!a.model_out.empty()) write_ply(a.model_out, PointCloud{scene.model, {}}, a.binary);
  std::cout << "instances " << scene.gt.poses.size() << ", scene points " << scene.scene.size() << "\n";
  return 0;
}

struct RegisterArgs {
  std::string model;
  std::string scene;
  std::string gt;
  std::string config;
  std::string preset = "scan2cad";
  std::string weights;
  bool random_weights = false;
  std::uint64_t seed = 0;
  std::string poses_out;
  std::string corrs_out;
};

json correspondences_json(const RegistrationReport& rep, const PointCloud& model_dense, const PointCloud& scene_dense) {
  json global = json::array();
  for (const auto& c : rep.global_corrs) {
    global.push_back({c.source.x(), c.source.y(), c.source.z(), c.target.x(), c.target.y(), c.target.z(), c.weight});
  }
  json instances = json::array();
  for (const auto& h : rep.registrations) {
    json corrs = json::array();
    for (const auto& m : h.corrs) {
      const Point3& p = model_dense.points[m.p];
      const Point3& q = scene_dense.points[m.q];
      corrs.push_back({p.x(), p.y(), p.z(), q.x(), q.y(), q.z(), m.score});
    }
    instances.push_back({{"inlier_count", h.inlier_count}, {"correspondences", corrs}});
  }
  return {{"format", "[px, py, pz, qx, qy, qz, weight]"}, {"global", global}, {"instances", instances}};
}

int run_register(const RegisterArgs& a) {
  PipelineConfig cfg = load_config(a.config, a.preset);
  if (a.gt.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "register needs --gt: the only built-in feature provider derives features from ground truth");
  }
  const GroundTruthFile gt = ground_truth_from_json(read_text_file(a.gt));
  const std::string model_source = a.model.empty() ? gt.model : a.model;
  const Points model = load_model(model_source, gt.model_points, gt.seed);
  const PointCloud scene = read_ply(a.scene);

  WeightSet weights;
  if (!a.weights.empty()) {
    weights = load_weights(a.weights);
  } else if (a.random_weights) {
    weights = WeightSet::random(cfg.features.dim, cfg.transformer.model_dim, cfg.transformer.heads,
                                cfg.transformer.iterations, a.seed);
  } else {
    weights = make_weights(cfg, cfg.features.dim);
  }
  if (weights.backbone_dim != cfg.features.dim) {
    throw Error(ErrorCode::ShapeMismatch, "weights expect " + std::to_string(weights.backbone_dim) +
                                              "-wide features but features.dim is " +
                                              std::to_string(cfg.features.dim));
  }

  OracleFeatureConfig fc = cfg.features;
  const GroundTruth truth = gt.gt;
  const FeatureProvider provider = [fc, truth](const PreparedCloud& m, const PreparedCloud& s) {
    return oracle_features(m, s, truth, fc);
  };
  const RegistrationReport rep = run_pipeline(model, scene, provider, weights, cfg, &truth);

  std::vector<PoseRecord> poses;
  for (const auto& h : rep.registrations) poses.push_back({h.pose, h.inlier_count, h.inlier_ratio});
  write_text_file(a.poses_out, poses_to_json(poses));
  if (!a.corrs_out.empty()) {
    // Dense indices refer to the first pyramid level of each cloud.
    const PointCloud model_dense = voxel_downsample(PointCloud{model, {}}, cfg.preprocess.base_voxel);
    const PointCloud scene_dense = voxel_downsample(scene, cfg.preprocess.base_voxel);
    write_text_file(a.corrs_out, correspondences_json(rep, model_dense, scene_dense).dump(1) + "\n");
  }
  std::cout << "registered " << rep.registrations.size() << " instances in " << fixed(rep.runtime_s) << " s\n";
  if (rep.metrics) {
    std::cout << "MR " << fixed(rep.metrics->recall) << " MP " << fixed(rep.metrics->precision) << " MF "
              << fixed(rep.metrics->f1) << " IR " << fixed(rep.metrics->inlier_ratio) << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::string poses;
  std::string gt;
  std::string model;
  std::string corrs;
  std::string config;
  std::string preset = "scan2cad";
  std::string json_out;
  std::string csv_out;
  std::string scene_name = "scene";
  double runtime = 0.0;
};

int run_eval(const EvalArgs& a) {
  const PipelineConfig cfg = load_config(a.config, a.preset);
  const GroundTruthFile gt = ground_truth_from_json(read_text_file(a.gt));
  const Points model = load_model(a.model.empty() ? gt.model : a.model, gt.model_points, gt.seed);
  std::vector<RigidTransform> pred;
  for (const auto& r : poses_from_json(read_text_file(a.poses))) pred.push_back(r.pose);

  MetricsReport rep = evaluate(pred, gt.gt.poses, model, gt.gt.diameter, cfg.evaluation, gt.gt.symmetric);
  rep.runtime_s = a.runtime;
  std::optional<double> ir;
  if (!a.corrs.empty()) {
    const json j = json::parse(read_text_file(a.corrs));
    std::vector<Correspondence> corrs;
    for (const auto& c : j.at("global")) {
      corrs.push_back({Point3(c[0], c[1], c[2]), Point3(c[3], c[4], c[5]), c[6].get<double>()});
    }
    if (!corrs.empty()) ir = inlier_ratio_metric(corrs, gt.gt.poses, cfg.evaluation.tau1);
  }

  json per_instance = json::array();
  for (const auto& m : rep.matches) {
    per_instance.push_back({{"gt", m.gt}, {"pred", m.pred}, {"rre_deg", m.rre_deg}, {"rte", m.rte}, {"add", m.add}});
  }
  const json out = {{"num_gt", rep.num_gt},
                    {"num_pred", rep.num_pred},
                    {"num_registered", rep.num_registered},
                    {"recall", rep.recall},
                    {"precision", rep.precision},
                    {"f1", rep.f1},
                    {"inlier_ratio", ir ? json(*ir) : json(nullptr)},
                    {"miou", nullptr},
                    {"runtime_s", rep.runtime_s},
                    {"matches", per_instance}};
  const std::string text = out.dump(2) + "\n";
  if (!a.json_out.empty()) {
    write_text_file(a.json_out, text);
  } else if (a.csv_out.empty()) {
    std::cout << text;
  }
  if (!a.csv_out.empty()) {
    std::ostringstream csv;
    csv << kMetricsCsvHeader << "\n"
        << a.scene_name << ',' << rep.num_gt << ',' << rep.num_pred << ',' << rep.num_registered << ','
        << fixed(rep.recall) << ',' << fixed(rep.precision) << ',' << fixed(rep.f1) << ','
        << (ir ? fixed(*ir) : "") << ",," << fixed(rep.runtime_s) << "\n";
    write_text_file(a.csv_out, csv.str());
  }
  return 0;
}

int run_bench_cmd(const std::string& config, const std::string& out) {
  const BenchConfig cfg = parse_bench_config(read_text_file(config));
  const std::string csv = run_bench(cfg);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  return 0;
}

int run_selftest_cmd() {
  int failed = 0;
  for (const auto& c : oracle::run_selftest()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    failed += c.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-instance point cloud registration"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Synthesize a multi-instance scene from a SceneSpec JSON");
  g->add_option("--spec", gen.spec, "SceneSpec JSON")->required()->check(CLI::ExistingFile);
  g->add_option("--scene", gen.scene_out, "Output scene PLY")->required();
  g->add_option("--gt", gen.gt_out, "Output ground-truth JSON")->required();
  g->add_option("--model-out", gen.model_out, "Also write the model as PLY");
  g->add_flag("--binary", gen.binary, "Write binary little-endian PLY");

  RegisterArgs reg;
  auto* r = app.add_subcommand("register", "Register every instance of a model in a scene");
  r->add_option("--model", reg.model, "Procedural model id or PLY path (default: from --gt)");
  r->add_option("--scene", reg.scene, "Scene PLY")->required()->check(CLI::ExistingFile);
  r->add_option("--gt", reg.gt, "Ground-truth JSON driving the oracle feature provider")->check(CLI::ExistingFile);
  r->add_option("--config", reg.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  r->add_option("--preset", reg.preset, "Preset used without --config")->check(CLI::IsMember({"scan2cad", "robi"}));
  auto* wopt = r->add_option("--weights", reg.weights, "Weights manifest JSON")->check(CLI::ExistingFile);
  auto* ropt = r->add_flag("--random-weights", reg.random_weights, "Seeded random transformer weights");
  r->add_option("--seed", reg.seed, "Seed for --random-weights");
  wopt->excludes(ropt);
  r->add_option("--poses", reg.poses_out, "Output poses JSON")->required();
  r->add_option("--correspondences", reg.corrs_out, "Output correspondences JSON");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predicted poses against ground truth");
  e->add_option("--poses", ev.poses, "Poses JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--gt", ev.gt, "Ground-truth JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--model", ev.model, "Procedural model id or PLY path (default: from --gt)");
  e->add_option("--correspondences", ev.corrs, "Correspondences JSON from register, for IR")
      ->check(CLI::ExistingFile);
  e->add_option("--config", ev.config, "Config JSON supplying thresholds")->check(CLI::ExistingFile);
  e->add_option("--preset", ev.preset, "Preset used without --config")->check(CLI::IsMember({"scan2cad", "robi"}));
  e->add_option("--json", ev.json_out, "Output metrics JSON (stdout when neither output is given)");
  e->add_option("--csv", ev.csv_out, "Output metrics CSV");
  e->add_option("--scene-name", ev.scene_name, "Value of the CSV scene column");
  e->add_option("--runtime", ev.runtime, "Registration runtime to report, in seconds");

  std::string bench_config, bench_out;
  auto* b = app.add_subcommand("bench", "Sweep noise, occlusion and inlier rate over synthetic scenes");
  b->add_option("--config", bench_config, "Bench config JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--out", bench_out, "Output CSV (default: stdout)");

  auto* s = app.add_subcommand("selftest", "Cross-check the library against independent oracles");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return run_generate(gen);
    if (*r) return run_register(reg);
    if (*e) return run_eval(ev);
    if (*b) return run_bench_cmd(bench_config, bench_out);
    if (*s) return run_selftest_cmd();
  } catch (const instreg::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
