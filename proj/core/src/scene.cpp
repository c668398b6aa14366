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

#include "instreg/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "instreg/error.hpp"
#include "instreg/io.hpp"
#include "instreg/spatial_grid.hpp"

namespace instreg {
namespace {

struct Box {
  Eigen::Vector3d lo, hi;
};

struct Face {
  Eigen::Vector3d origin, u, v;
  double area() const { return u.cross(v).norm(); }
};

std::vector<Face> box_faces(const Box& b) {
  const Eigen::Vector3d e = b.hi - b.lo;
  const Eigen::Vector3d ex(e.x(), 0, 0), ey(0, e.y(), 0), ez(0, 0, e.z());
  return {{b.lo, ex, ey}, {b.lo + ez, ex, ey}, {b.lo, ex, ez},
          {b.lo + ey, ex, ez}, {b.lo, ey, ez}, {b.lo + ex, ey, ez}};
}

Points sample_faces(const std::vector<Face>& faces, std::size_t n, std::mt19937_64& rng) {
  std::vector<double> areas;
  for (const auto& f : faces) areas.push_back(f.area());
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Points out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Face& f = faces[pick(rng)];
    const double a = unit(rng);
    const double b = unit(rng);
    out.push_back(f.origin + a * f.u + b * f.v);
  }
  return out;
}

Points sample_boxes(const std::vector<Box>& boxes, std::size_t n, std::mt19937_64& rng) {
  std::vector<Face> faces;
  for (const auto& b : boxes) {
    const auto f = box_faces(b);
    faces.insert(faces.end(), f.begin(), f.end());
  }
  return sample_faces(faces, n, rng);
}

void center(Points& pts) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  for (auto& p : pts) p -= c;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

Eigen::Vector3d random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector3d d(g(rng), g(rng), g(rng));
  while (d.norm() < 1e-12) d = Eigen::Vector3d(g(rng), g(rng), g(rng));
  return d.normalized();
}

}  // namespace

Points procedural_model(const std::string& id, std::size_t points, std::uint64_t seed) {
  if (points == 0) throw Error(ErrorCode::ModelLoadFailure, "model needs at least one point");
  std::mt19937_64 rng(seed ^ 0x6d6f64656cULL);
  Points pts;
  if (id == "chair") {
    const double leg = 0.05;
    const std::vector<Box> boxes = {
        {{-0.25, 0.42, -0.25}, {0.25, 0.47, 0.25}},     // seat
        {{-0.25, 0.47, -0.25}, {0.25, 0.97, -0.20}},    // back
        {{-0.25, 0.0, -0.25}, {-0.25 + leg, 0.42, -0.25 + leg}},
        {{0.25 - leg, 0.0, -0.25}, {0.25, 0.42, -0.25 + leg}},
        {{-0.25, 0.0, 0.25 - leg}, {-0.25 + leg, 0.42, 0.25}},
        {{0.25 - leg, 0.0, 0.25 - leg}, {0.25, 0.42, 0.25}},
        {{0.20, 0.47, -0.20}, {0.25, 0.65, 0.20}},      // single arm rest breaks the mirror symmetry
    };
    pts = sample_boxes(boxes, points, rng);
  } else if (id == "bracket") {
    const std::vector<Box> boxes = {
        {{0.0, 0.0, 0.0}, {0.60, 0.05, 0.30}},
        {{0.0, 0.05, 0.0}, {0.05, 0.45, 0.30}},
        {{0.40, 0.05, 0.0}, {0.45, 0.20, 0.10}},
    };
    pts = sample_boxes(boxes, points, rng);
  } else if (id == "prism") {
    pts = sample_boxes({{{-0.15, -0.4, -0.15}, {0.15, 0.4, 0.15}}}, points, rng);
  } else if (id == "sphere") {
    pts.reserve(points);
    for (std::size_t i = 0; i < points; ++i) pts.push_back(0.5 * random_direction(rng));
  } else {
    throw Error(ErrorCode::ModelLoadFailure, "unknown procedural model '" + id + "'");
  }
  center(pts);
  return pts;
}

bool is_symmetric_model(const std::string& id) { return id == "sphere" || id == "prism"; }

Points load_model(const std::string& source, std::size_t points, std::uint64_t seed) {
  const bool is_ply = source.size() > 4 && source.substr(source.size() - 4) == ".ply";
  if (!is_ply) return procedural_model(source, points, seed);
  PointCloud cloud;
  try {
    cloud = read_ply(source);
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelLoadFailure, e.what());
  }
  if (cloud.points.empty()) throw Error(ErrorCode::ModelLoadFailure, "model file has no points: " + source);
  return subsample_stride(cloud.points, points);
}

void SceneSpec::validate() const {
  if (min_instances < 1 || max_instances < min_instances) {
    throw Error(ErrorCode::InvalidArgument, "instance range must satisfy 1 <= min <= max");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");
  if (!(occlusion >= 0.0 && occlusion < 1.0)) throw Error(ErrorCode::InvalidArgument, "occlusion must lie in [0, 1)");
  if (!(background_fraction >= 0.0)) throw Error(ErrorCode::InvalidArgument, "background fraction must be >= 0");
  if (!(separation > 0.0)) throw Error(ErrorCode::InvalidArgument, "separation must be > 0");
  if (!(label_radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "label radius must be >= 0");
  if (model_points < 3) throw Error(ErrorCode::InvalidArgument, "model needs at least 3 points");
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene out;
  out.model = load_model(spec.model, spec.model_points, spec.seed);
  const double diam = diameter(out.model);
  if (!(diam > 0.0)) throw Error(ErrorCode::ModelLoadFailure, "model has zero extent");
  out.gt.diameter = diam;
  out.gt.symmetric = is_symmetric_model(spec.model);

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> count(spec.min_instances, spec.max_instances);
  const int k = count(rng);
  const Points add_model = subsample_stride(out.model, 256);

  double side = diam * spec.separation * (std::cbrt(static_cast<double>(k)) + 1.0);
  while (static_cast<int>(out.gt.poses.size()) < k) {
    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      std::uniform_real_distribution<double> coord(-0.5 * side, 0.5 * side);
      RigidTransform t;
      t.rotation = random_rotation(rng);
      t.translation = Eigen::Vector3d(coord(rng), coord(rng), coord(rng));
      placed = std::all_of(out.gt.poses.begin(), out.gt.poses.end(), [&](const RigidTransform& o) {
        return (o.translation - t.translation).norm() >= spec.separation * diam &&
               add_distance(o, t, add_model) >= 0.5 * diam;
      });
      if (placed) out.gt.poses.push_back(t);
    }
    if (!placed) side *= 1.25;
  }

  const double sigma = spec.noise_relative ? spec.noise_sigma * diam : spec.noise_sigma;
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  const std::size_t n = out.model.size();
  const std::size_t removed = static_cast<std::size_t>(std::floor(spec.occlusion * static_cast<double>(n)));
  Points clean;
  for (int inst = 0; inst < k; ++inst) {
    const RigidTransform& t = out.gt.poses[inst];
    const Eigen::Vector3d dir = random_direction(rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> height(n);
    for (std::size_t i = 0; i < n; ++i) height[i] = (t.rotation * out.model[i]).dot(dir);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return height[a] > height[b]; });
    std::vector<char> keep(n, 1);
    for (std::size_t i = 0; i < removed; ++i) keep[order[i]] = 0;

    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[i]) continue;
      const Point3 p = t(out.model[i]);
      clean.push_back(p);
      Point3 q = p;
      if (sigma > 0.0) q += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
      out.scene.points.push_back(q);
      out.scene.labels.push_back(inst + 1);
    }
    out.gt.visibility.push_back(static_cast<double>(n - removed) / static_cast<double>(n));
  }

  const std::size_t instance_points = out.scene.points.size();
  const std::size_t bg_count = spec.background_points >= 0
                                   ? static_cast<std::size_t>(spec.background_points)
                                   : static_cast<std::size_t>(std::llround(spec.background_fraction *
                                                                           static_cast<double>(instance_points)));
  if (bg_count > 0) {
    Eigen::Vector3d lo = clean.front(), hi = clean.front();
    for (const auto& p : clean) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    lo.array() -= 0.1 * diam;
    hi.array() += 0.1 * diam;
    const double radius = spec.label_radius > 0.0 ? spec.label_radius : 0.05 * diam;
    const PointGrid grid(clean, radius);
    std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y()), uz(lo.z(), hi.z());
    std::size_t added = 0;
    for (std::size_t attempt = 0; added < bg_count && attempt < 100 * bg_count; ++attempt) {
      const Point3 p(ux(rng), uy(rng), uz(rng));
      if (grid.any_within(p, radius)) continue;
      out.scene.points.push_back(p);
      out.scene.labels.push_back(kBackgroundLabel);
      ++added;
    }
  }
  return out;
}

}  // namespace instreg
