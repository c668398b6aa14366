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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "instreg/attention.hpp"
#include "instreg/bench.hpp"
#include "instreg/config.hpp"
#include "instreg/embedding.hpp"
#include "instreg/geometry.hpp"
#include "instreg/losses.hpp"
#include "instreg/matching.hpp"
#include "instreg/metrics.hpp"
#include "instreg/pipeline.hpp"
#include "instreg/preprocess.hpp"
#include "instreg/scene.hpp"
#include "instreg/selection.hpp"
#include "instreg_oracle/oracle.hpp"

namespace {

using namespace instreg;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rotation_error_rad(const RigidTransform& a, const RigidTransform& b) {
  return rre_rte(a, b).rotation_deg * M_PI / 180.0;
}

Points random_cloud(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Points pts(n);
  for (auto& p : pts) p = Point3(u(rng), u(rng), u(rng));
  return pts;
}

Outcome criterion_mf() {
  int consistent = 0, matched = 0, errata = 0;
  double worst = 0.0;
  std::string erratum;
  for (const auto& t : oracle::mf_fixtures()) {
    const double mf = harmonic_mean(t.mr, t.mp);
    const double err = std::abs(mf - t.mf);
    if (t.printed_consistent) {
      ++consistent;
      worst = std::max(worst, err);
      if (err <= 0.01) ++matched;
    } else {
      // The printed value is not the harmonic mean of its own MR/MP.
      ++errata;
      if (err > 0.01) erratum += std::string(t.table) + " '" + t.row + "' printed " + fmt("%.2f", t.mf) +
                                 ", harmonic mean " + fmt("%.3f", mf);
    }
  }
  const bool headline = std::abs(harmonic_mean(38.51, 41.19) - 39.80) <= 0.01 &&
                        std::abs(harmonic_mean(95.70, 91.21) - 93.40) <= 0.01 &&
                        std::abs(harmonic_mean(94.63, 74.83) - 83.57) <= 0.01;
  Outcome o;
  o.passed = headline && consistent >= 12 && matched == consistent && errata == 1 && !erratum.empty();
  o.detail = std::to_string(matched) + "/" + std::to_string(consistent) + " triples within 0.01 (worst " +
             fmt("%.4f", worst) + "); printed erratum: " + erratum;
  return o;
}

Outcome criterion_svd() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> count(10, 100);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  double worst_r = 0.0, worst_t = 0.0;
  bool neutral = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const RigidTransform gt = oracle::random_pose(rng, 2.0);
    std::vector<Correspondence> corrs;
    for (const auto& p : random_cloud(rng, count(rng), 1.0)) corrs.push_back({p, gt(p), weight(rng)});
    const RigidTransform est = weighted_svd(corrs);
    worst_r = std::max(worst_r, rotation_error_rad(est, gt));
    worst_t = std::max(worst_t, (est.translation - gt.translation).norm());

    std::vector<Correspondence> polluted;
    std::uniform_real_distribution<double> far(-50.0, 50.0);
    for (const auto& c : corrs) {
      polluted.push_back(c);
      if (polluted.size() % 3 == 0) polluted.push_back({c.source, Point3(far(rng), far(rng), far(rng)), 0.0});
    }
    const RigidTransform with_outliers = weighted_svd(polluted);
    neutral = neutral && with_outliers.rotation == est.rotation && with_outliers.translation == est.translation;
  }
  return {worst_r < 1e-8 && worst_t < 1e-8 && neutral,
          fmt("1000 instances: max rotation error %.2e rad, max translation error %.2e m", worst_r, worst_t) +
              (neutral ? "; zero-weight outliers leave the solution bit-identical" : "; zero-weight outliers moved it")};
}

Outcome criterion_sinkhorn() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> side(1, 64);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  double worst = 0.0;
  bool mutual_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = side(rng), m = side(rng);
    Eigen::MatrixXd s(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) s(i, j) = score(rng);
    }
    const Eigen::MatrixXd z = sinkhorn_log_assignment(s, 1.0, 100).array().exp().matrix();
    for (int i = 0; i <= n; ++i) worst = std::max(worst, std::abs(z.row(i).sum() - (i < n ? 1.0 : m)));
    for (int j = 0; j <= m; ++j) worst = std::max(worst, std::abs(z.col(j).sum() - (j < m ? 1.0 : n)));

    const Eigen::MatrixXd real = z.topLeftCorner(n, m);
    const auto picked = mutual_top_k(real, 3);
    const auto oracle_pairs = oracle::brute_mutual_top_k(real, 3);
    if (picked.size() != oracle_pairs.size()) mutual_ok = false;
    for (std::size_t t = 0; mutual_ok && t < picked.size(); ++t) {
      mutual_ok = picked[t].p == oracle_pairs[t].first && picked[t].q == oracle_pairs[t].second;
      // Rank of q in row p and of p in column q, recounted directly.
      int row_rank = 0, col_rank = 0;
      for (int j = 0; j < m; ++j) {
        const double v = real(picked[t].p, j), ref = real(picked[t].p, picked[t].q);
        row_rank += v > ref || (v == ref && j < picked[t].q);
      }
      for (int i = 0; i < n; ++i) {
        const double v = real(i, picked[t].q), ref = real(picked[t].p, picked[t].q);
        col_rank += v > ref || (v == ref && i < picked[t].p);
      }
      mutual_ok = mutual_ok && row_rank < 3 && col_rank < 3;
    }
  }
  return {worst < 1e-4 && mutual_ok,
          fmt("200 matrices up to 64x64: max marginal error %.2e", worst) +
              (mutual_ok ? "; mutual top-3 matches recount" : "; mutual top-3 mismatch")};
}

Outcome criterion_masking() {
  std::mt19937_64 rng(3);
  double worst_mask = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 8 + trial % 17;
    const int k = 2 + trial % 7;
    const int heads = 1 << (trial % 3);
    const int d = heads * (2 + trial % 4);
    SuperpointGraph g;
    g.superpoints = random_cloud(rng, n, 1.0);
    g.knn = knn_table(g.superpoints, std::min(k, n));
    g.geodesic = geodesic_table(g, 3);
    const WeightSet w = WeightSet::random(d, d, heads, 1, 1000 + trial);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(n, d), emb(n * g.k(), d);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    for (int i = 0; i < emb.size(); ++i) emb.data()[i] = gauss(rng);
    const PairEmbedding pe{n, g.k(), emb};
    InstanceMask mask = InstanceMask::all_allowed(n, g.k());
    std::bernoulli_distribution drop(0.5);
    for (int i = 0; i < n; ++i) {
      for (int s = 1; s < g.k(); ++s) mask.allowed(i, s) = !drop(rng);
    }
    const BlockWeights& b = w.iterations[0].geometric;
    const Eigen::MatrixXd masked = geometric_encoding_block(x, g, pe, &mask, b, heads);
    const Eigen::MatrixXd reduced = oracle::naive_block_tail(
        x, oracle::naive_local_attention(x, g.knn, oracle::allowed_slots(mask), &emb, b.attention, heads), b);
    worst_mask = std::max(worst_mask, (masked - reduced).cwiseAbs().maxCoeff());
  }

  double worst_inv = 0.0;
  const Points cloud = random_cloud(rng, 48, 1.0);
  SuperpointGraph base;
  base.superpoints = cloud;
  base.knn = knn_table(cloud, 16);
  EmbeddingConfig ec;
  const PairEmbedding ref = geometric_structure_embedding(base, ec);
  for (int trial = 0; trial < 100; ++trial) {
    const RigidTransform g = oracle::random_pose(rng, 5.0);
    SuperpointGraph moved;
    moved.superpoints = apply_transform(g, cloud);
    moved.knn = knn_table(moved.superpoints, 16);
    const PairEmbedding e = geometric_structure_embedding(moved, ec);
    worst_inv = std::max(worst_inv, (e.data - ref.data).cwiseAbs().maxCoeff());
  }
  return {worst_mask <= 1e-9 && worst_inv <= 1e-6,
          fmt("masked vs reduced neighborhood max diff %.2e over 100 fixtures; embedding drift %.2e over 100 rigid "
              "transforms",
              worst_mask, worst_inv)};
}

PipelineConfig e2e_config() {
  PipelineConfig cfg = preset_config("scan2cad");
  cfg.transformer.model_dim = 32;
  cfg.transformer.init = "passthrough";
  cfg.embedding.dim = 32;
  cfg.mask_source = MaskSource::GroundTruth;
  cfg.features.inlier_rate = 0.5;
  cfg.selection.tau3 = 0.2;  // many instances per scene, as on ROBI
  cfg.run_baseline = true;
  cfg.ransac.max_models = 16;
  cfg.validate();
  return cfg;
}

SceneSpec e2e_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.model = "chair";
  spec.model_points = 512;
  spec.min_instances = 4;
  spec.max_instances = 16;
  spec.noise_sigma = 0.005;
  spec.noise_relative = true;
  spec.occlusion = 0.3;
  spec.seed = seed;
  return spec;
}

double e2e_seconds = 0.0;

Outcome criterion_e2e() {
  const auto start = Clock::now();
  const PipelineConfig cfg = e2e_config();
  const WeightSet weights = make_weights(cfg, cfg.features.dim);
  std::vector<MetricsReport> ours, ransac;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RegistrationReport rep = run_synthetic(e2e_scene(s), cfg, weights);
    ours.push_back(*rep.metrics);
    ransac.push_back(*rep.baseline);
  }
  e2e_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const Aggregate a = aggregate(ours);
  const Aggregate b = aggregate(ransac);
  const bool ok = a.mr >= 0.9 && a.mp >= 0.9 && a.mf > b.mf && e2e_seconds < 300.0;
  return {ok, std::to_string(a.instances) + " instances in 100 scenes" +
                  fmt(": MR %.4f MP %.4f MF %.4f", a.mr, a.mp, a.mf) +
                  fmt("; RANSAC MR %.4f MP %.4f MF %.4f; IR %.4f", b.mr, b.mp, b.mf, a.ir) +
                  fmt("; %.1f s", e2e_seconds)};
}

Outcome criterion_nms() {
  std::mt19937_64 rng(6);
  SelectionConfig cfg;
  const Points model = procedural_model("chair", 512, 6);
  cfg.diameter = diameter(model);
  int exact_scenes = 0;
  double worst_pose = 0.0, worst_sim = -1.0;
  const int scenes = 20;
  for (int sc = 0; sc < scenes; ++sc) {
    SceneSpec spec;
    spec.model_points = 512;
    spec.background_points = 0;
    spec.seed = 600 + sc;
    const std::vector<RigidTransform> poses = generate_scene(spec).gt.poses;
    const int k = static_cast<int>(poses.size());
    Points scene;
    for (const auto& pose : poses) {
      for (const auto& p : model) scene.push_back(pose(p));
    }
    const int np = static_cast<int>(model.size());
    std::vector<PoseHypothesis> cands;
    std::vector<Correspondence> global;
    std::uniform_int_distribution<int> pick(0, np - 1);
    for (int inst = 0; inst < k; ++inst) {
      for (int dup = 0; dup < 3; ++dup) {
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < 40) chosen.insert(pick(rng));
        PoseHypothesis h;
        std::vector<Correspondence> corrs;
        for (int i : chosen) {
          h.corrs.push_back({i, inst * np + i, 1.0});
          corrs.push_back({model[i], scene[inst * np + i], 1.0});
          global.push_back(corrs.back());
        }
        h.pose = weighted_svd(corrs);
        h.seed_index = 3 * inst + dup;
        cands.push_back(std::move(h));
      }
    }
    std::shuffle(cands.begin(), cands.end(), rng);
    const auto out = nms_select(cands, global, cfg, model, model, scene);
    bool exact = static_cast<int>(out.size()) == k;
    std::vector<bool> used(k, false);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        worst_sim = std::max(worst_sim, pose_similarity(out[i].pose, out[j].pose, model, cfg.diameter));
      }
      double best = 1e9;
      int best_k = -1;
      for (int inst = 0; inst < k; ++inst) {
        const double e = std::max(rotation_error_rad(out[i].pose, poses[inst]),
                                  (out[i].pose.translation - poses[inst].translation).norm());
        if (e < best) {
          best = e;
          best_k = inst;
        }
      }
      if (best_k >= 0) {
        exact = exact && !used[best_k];
        used[best_k] = true;
      }
      worst_pose = std::max(worst_pose, best);
    }
    exact_scenes += exact;
  }
  return {exact_scenes == scenes && worst_pose < 1e-6 && worst_sim < cfg.tau_s,
          std::to_string(exact_scenes) + "/" + std::to_string(scenes) +
              " scenes with exactly K outputs" + fmt("; max pose error %.2e; max pairwise similarity %.3f",
                                                      worst_pose, worst_sim)};
}

Outcome criterion_losses() {
  const LossConfig cfg;
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const double g = cfg.gamma, dp = cfg.delta_p, dn = cfg.delta_n;

  const std::vector<double> one{1.0};
  check(circle_loss_term(std::vector<double>{dp}, one, std::vector<double>{dn}, cfg), std::log(2.0));
  // Positive at d = 0, negative at d = 2, full overlap.
  check(circle_loss_term(std::vector<double>{0.0}, one, std::vector<double>{2.0}, cfg),
        std::log1p(std::exp(g * dp * dp) * std::exp(g * (dn - 2.0) * (dn - 2.0))));
  // Zero overlap silences the positive exponent whatever its distance.
  check(circle_loss_term(std::vector<double>{0.7}, std::vector<double>{0.0}, std::vector<double>{1.0}, cfg),
        std::log1p(std::exp(g * (dn - 1.0) * (dn - 1.0))));

  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 3);
  const std::vector<std::pair<int, int>> pair{{0, 0}};
  const std::vector<int> none;
  check(nll_matching_loss(z, std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}, std::vector<int>{0},
                          std::vector<int>{1}),
        0.0);
  z(0, 0) = std::exp(-1.0);
  check(nll_matching_loss(z, pair, none, none), 1.0);
  z(0, 0) = 0.5;
  z(1, 1) = 0.5;
  check(nll_matching_loss(z, std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}, none, none), 2.0 * std::log(2.0));

  const int n = 10;
  check(mask_loss(std::vector<double>(n, 1.0), std::vector<bool>(n, true)), 1.0 - 2.0 * (n + 1) / (2.0 * n + 1));
  check(mask_loss(std::vector<double>(n, 0.0), std::vector<bool>(n, false)), -1.0);
  std::vector<bool> gt{true, false, true, true, false, false, true, false};
  const double ones = 4.0;
  check(mask_loss(std::vector<double>(gt.size(), 0.5), gt),
        std::log(2.0) + 1.0 - 2.0 * (0.5 * ones + 1.0) / (0.5 * gt.size() + ones + 1.0));
  return {worst <= 1e-9, fmt("9 closed-form fixtures, max deviation %.2e", worst)};
}

Outcome criterion_determinism() {
  BenchConfig cfg;
  cfg.pipeline = e2e_config();
  cfg.scene = e2e_scene(0);
  cfg.noise = {0.005};
  cfg.occlusion = {0.3};
  cfg.inlier_rate = {0.5};
  cfg.scenes = 5;
  cfg.seed = 8;
  const auto start = Clock::now();
  const std::string first = run_bench(cfg);
  const std::string second = run_bench(cfg);
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  auto strip = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  const bool same = strip(first) == strip(second);
  const bool has_rows = std::count(first.begin(), first.end(), '\n') > 2;
  const double limit = e2e_seconds > 0.0 ? 2.0 * e2e_seconds : 600.0;
  return {same && has_rows && secs < limit,
          std::string(same ? "two bench runs byte-identical" : "bench runs differ") + " outside runtime_s (" +
              std::to_string(std::count(first.begin(), first.end(), '\n')) + " lines)" + fmt("; %.1f s", secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"metric-formula fidelity", criterion_mf},   {"pose-solver exactness", criterion_svd},
      {"Sinkhorn contract", criterion_sinkhorn},   {"masking equivalence", criterion_masking},
      {"end-to-end synthetic recovery", criterion_e2e}, {"NMS dedup exactness", criterion_nms},
      {"loss fixtures", criterion_losses},         {"determinism", criterion_determinism},
  };
  const double budgets[] = {1.0, 5.0, 10.0, 10.0, 300.0, 10.0, 1.0, 1e9};

  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < budgets[c];
    const bool passed = o.passed && in_time;
    failures += passed ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.3f s%s]\n", passed ? "PASS" : "FAIL", id, criteria[c].first,
                o.detail.c_str(), secs, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
