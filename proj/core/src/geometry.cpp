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

#include "instreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "instreg/error.hpp"

namespace instreg {

RigidTransform RigidTransform::from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                               const Eigen::Vector3d& translation) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  t.translation = translation;
  return t;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Points apply_transform(const RigidTransform& t, std::span<const Point3> pts) {
  Points out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t(p));
  return out;
}

RigidTransform weighted_svd(std::span<const Correspondence> corrs) {
  double total = 0.0;
  std::size_t positive = 0;
  Eigen::Vector3d src_centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_centroid = Eigen::Vector3d::Zero();
  for (const auto& c : corrs) {
    if (!(c.weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "correspondence weight must be non-negative");
    if (c.weight == 0.0) continue;
    ++positive;
    total += c.weight;
    src_centroid += c.weight * c.source;
    dst_centroid += c.weight * c.target;
  }
  if (positive < 3 || !(total > 0.0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "need at least 3 correspondences with positive weight");
  }
  src_centroid /= total;
  dst_centroid /= total;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& c : corrs) {
    if (c.weight == 0.0) continue;
    cov.noalias() += c.weight * (c.source - src_centroid) * (c.target - dst_centroid).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "weighted cross-covariance has rank < 2");
  }

  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  fix(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidTransform out;
  out.rotation = svd.matrixV() * fix * svd.matrixU().transpose();
  out.translation = dst_centroid - out.rotation * src_centroid;
  return out;
}

double add_distance(const RigidTransform& t1, const RigidTransform& t2, std::span<const Point3> model) {
  if (model.empty()) throw Error(ErrorCode::EmptyModel, "ADD needs a non-empty model");
  double sum = 0.0;
  for (const auto& p : model) sum += (t1(p) - t2(p)).norm();
  return sum / static_cast<double>(model.size());
}

double add_s_distance(const RigidTransform& t1, const RigidTransform& t2, std::span<const Point3> model) {
  if (model.empty()) throw Error(ErrorCode::EmptyModel, "ADD-S needs a non-empty model");
  const Points moved = apply_transform(t2, model);
  double sum = 0.0;
  for (const auto& p : model) {
    const Point3 a = t1(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : moved) best = std::min(best, (a - b).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(model.size());
}

PoseError rre_rte(const RigidTransform& pred, const RigidTransform& gt) {
  // atan2 of the (sin, cos) pair equals the clamped arccos of the trace
  // formula but keeps full precision for tiny angles.
  const Eigen::Matrix3d rel = gt.rotation.transpose() * pred.rotation;
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double s = std::min(1.0, 0.5 * axis.norm());
  PoseError e;
  e.rotation_deg = std::atan2(s, c) * 180.0 / M_PI;
  e.translation = (pred.translation - gt.translation).norm();
  return e;
}

double diameter(std::span<const Point3> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, (pts[i] - pts[j]).squaredNorm());
  }
  return std::sqrt(best);
}

Points subsample_stride(std::span<const Point3> pts, std::size_t max_points) {
  if (pts.size() <= max_points || max_points == 0) return Points(pts.begin(), pts.end());
  Points out;
  out.reserve(max_points);
  for (std::size_t i = 0; i < max_points; ++i) out.push_back(pts[i * pts.size() / max_points]);
  return out;
}

}  // namespace instreg
