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

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace instreg {

using Point3 = Eigen::Vector3d;
using Points = std::vector<Point3>;

/// A proper rigid motion x -> rotation * x + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                        const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());

  Point3 operator()(const Point3& p) const { return rotation * p + translation; }

  /// (this * other)(x) = this(other(x)).
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// Orthonormality and unit determinant within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

struct Correspondence {
  Point3 source;
  Point3 target;
  double weight = 1.0;
};

Points apply_transform(const RigidTransform& t, std::span<const Point3> pts);

/// Minimizer of sum_i w_i * ||R s_i + t - d_i||^2 via the weighted-centroid
/// Kabsch construction with reflection correction.
///
/// Throws DegenerateConfiguration when fewer than three pairs carry positive
/// weight, or when the weighted cross-covariance has rank below two.
RigidTransform weighted_svd(std::span<const Correspondence> corrs);

/// Mean of ||t1(p) - t2(p)|| over the model points.
double add_distance(const RigidTransform& t1, const RigidTransform& t2, std::span<const Point3> model);

/// Mean over p of min over p' of ||t1(p) - t2(p')||; suited to symmetric models.
double add_s_distance(const RigidTransform& t1, const RigidTransform& t2, std::span<const Point3> model);

struct PoseError {
  double rotation_deg = 0.0;
  double translation = 0.0;
};

/// Relative rotation angle (degrees, in [0, 180]) and translation distance.
PoseError rre_rte(const RigidTransform& pred, const RigidTransform& gt);

/// Largest pairwise distance between points.
double diameter(std::span<const Point3> pts);

/// Deterministic stride subsample to at most `max_points` points.
Points subsample_stride(std::span<const Point3> pts, std::size_t max_points);

}  // namespace instreg
