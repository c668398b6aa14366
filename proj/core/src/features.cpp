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

#include "instreg/features.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include "instreg/error.hpp"
#include "instreg/spatial_grid.hpp"

namespace instreg {
namespace {

struct FourierEncoder {
  Eigen::MatrixXd freq;  // dim x 3
  Eigen::VectorXd phase;

  Eigen::RowVectorXd operator()(const Point3& p) const {
    Eigen::RowVectorXd f = ((freq * p) + phase).array().cos().transpose();
    return f.normalized();
  }
};

Eigen::RowVectorXd gaussian_row(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::RowVectorXd r(dim);
  for (int i = 0; i < dim; ++i) r(i) = g(rng);
  return r;
}

Eigen::RowVectorXd random_unit_row(int dim, std::mt19937_64& rng) {
  Eigen::RowVectorXd r = gaussian_row(dim, rng);
  while (r.norm() == 0.0) r = gaussian_row(dim, rng);
  return r.normalized();
}

constexpr std::uint64_t kCalibrationSeed = 0x63616c6962ULL;

}  // namespace

double mutual_top1_inlier_ratio(double sigma, int dim, int n_model, std::uint64_t seed) {
  if (dim < 1 || n_model < 1) throw Error(ErrorCode::InvalidArgument, "calibration needs dim >= 1 and n_model >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd f(n_model, dim);
  for (int i = 0; i < n_model; ++i) f.row(i) = gaussian_row(dim, rng);
  Eigen::MatrixXd g = f;
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (int i = 0; i < n_model; ++i)
    for (int c = 0; c < dim; ++c) g(i, c) += sigma * jitter(rng);
  const Eigen::MatrixXd s = g * f.transpose();  // scene x model
  std::vector<int> best_model(n_model), best_scene(n_model);
  for (int i = 0; i < n_model; ++i) s.row(i).maxCoeff(&best_model[i]);
  for (int j = 0; j < n_model; ++j) s.col(j).maxCoeff(&best_scene[j]);
  int mutual = 0, correct = 0;
  for (int i = 0; i < n_model; ++i) {
    if (best_scene[best_model[i]] != i) continue;
    ++mutual;
    if (best_model[i] == i) ++correct;
  }
  return mutual == 0 ? 0.0 : static_cast<double>(correct) / mutual;
}

double calibrated_feature_noise(double inlier_rate, int dim, int n_model) {
  if (!(inlier_rate >= 0.0 && inlier_rate <= 1.0)) throw Error(ErrorCode::InvalidArgument, "inlier rate must lie in [0, 1]");
  if (inlier_rate >= 1.0) return 0.0;
  if (inlier_rate <= 0.0) return std::numeric_limits<double>::infinity();
  static std::mutex mu;
  static std::map<std::tuple<double, int, int>, double> cache;
  const auto key = std::make_tuple(inlier_rate, dim, n_model);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  // three fixed samples averaged; the curve falls from 1 toward chance as sigma grows
  auto ir = [&](double sigma) {
    double sum = 0.0;
    for (std::uint64_t r = 0; r < 3; ++r) sum += mutual_top1_inlier_ratio(sigma, dim, n_model, kCalibrationSeed + r);
    return sum / 3.0;
  };
  double lo = 0.0, hi = 1.0;
  while (ir(hi) > inlier_rate && hi < 1e6) hi *= 2.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ir(mid) > inlier_rate ? lo : hi) = mid;
  }
  const double sigma = 0.5 * (lo + hi);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, sigma);
  return sigma;
}

void OracleFeatureConfig::validate() const {
  if (!(inlier_rate >= 0.0 && inlier_rate <= 1.0)) throw Error(ErrorCode::InvalidArgument, "inlier rate must lie in [0, 1]");
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "feature dim must be >= 1");
  if (!(noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "feature noise must be >= 0");
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::InvalidArgument, "feature bandwidth must be > 0");
}

FeatureBundle oracle_features(const PreparedCloud& model, const PreparedCloud& scene, const GroundTruth& gt,
                              const OracleFeatureConfig& cfg) {
  cfg.validate();
  if (model.dense.points.empty()) throw Error(ErrorCode::EmptyModel, "model has no points");
  if (!scene.dense.has_labels()) throw Error(ErrorCode::InvalidArgument, "oracle features need a labeled scene");
  const int d = cfg.dim;
  const int k_inst = static_cast<int>(gt.poses.size());
  std::mt19937_64 rng(cfg.seed ^ 0x66656174ULL);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const double point_sigma =
      std::hypot(cfg.noise, calibrated_feature_noise(cfg.inlier_rate, d, static_cast<int>(model.dense.size())));
  auto noisy = [&](Eigen::RowVectorXd row, double sigma) {
    if (sigma > 0.0) {
      for (int i = 0; i < d; ++i) row(i) += sigma * jitter(rng);
    }
    return row;
  };

  FeatureBundle out;
  out.point_p.resize(model.dense.size(), d);
  for (std::size_t i = 0; i < model.dense.size(); ++i) out.point_p.row(i) = gaussian_row(d, rng);

  const double diam = gt.diameter > 0.0 ? gt.diameter : diameter(model.dense.points);
  const PointGrid grid(model.dense.points, std::max(diam / 20.0, 1e-9));
  std::vector<RigidTransform> inverse;
  for (const auto& t : gt.poses) inverse.push_back(t.inverse());

  out.point_q.resize(scene.dense.size(), d);
  for (std::size_t i = 0; i < scene.dense.size(); ++i) {
    const int label = scene.dense.labels[i];
    if (label < 1 || label > k_inst) {
      out.point_q.row(i) = gaussian_row(d, rng);
      continue;
    }
    if (!std::isfinite(point_sigma)) {
      out.point_q.row(i) = gaussian_row(d, rng);
      continue;
    }
    const int src = grid.nearest(inverse[label - 1](scene.dense.points[i]));
    out.point_q.row(i) = noisy(out.point_p.row(src), point_sigma);
  }

  FourierEncoder enc{Eigen::MatrixXd(d, 3), Eigen::VectorXd(d)};
  std::normal_distribution<double> freq(0.0, 1.0 / (cfg.bandwidth * diam));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  for (int i = 0; i < d; ++i) {
    for (int c = 0; c < 3; ++c) enc.freq(i, c) = freq(rng);
    enc.phase(i) = phase(rng);
  }
  out.super_p.resize(model.graph.size(), d);
  for (int s = 0; s < model.graph.size(); ++s) out.super_p.row(s) = enc(model.graph.superpoints[s]);

  const std::vector<int> super_labels = superpoint_labels(scene.graph, scene.dense.labels);
  // unit-norm encodings, so per-entry noise shrinks by sqrt(d) against the N(0, 1) calibration
  const double super_sigma = cfg.noise / std::sqrt(static_cast<double>(d));
  out.super_q.resize(scene.graph.size(), d);
  for (int s = 0; s < scene.graph.size(); ++s) {
    const int label = super_labels[s];
    if (label < 1 || label > k_inst || !std::isfinite(super_sigma)) {
      out.super_q.row(s) = random_unit_row(d, rng);
      continue;
    }
    Eigen::RowVectorXd row = noisy(enc(inverse[label - 1](scene.graph.superpoints[s])), super_sigma);
    while (row.norm() == 0.0) row = random_unit_row(d, rng);
    out.super_q.row(s) = row.normalized();
  }
  return out;
}

}  // namespace instreg
