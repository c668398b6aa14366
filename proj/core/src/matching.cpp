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

#include "instreg/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "instreg/error.hpp"

namespace instreg {
namespace {

// Beyond this score spread the exponentiated kernel loses too much range and
// the iteration falls back to log-sum-exp.
constexpr double kKernelRange = 200.0;

bool ranks_before(double va, int ia, double vb, int ib) {
  if (va != vb) return va > vb;
  return ia < ib;
}

std::vector<int> top_indices(const Eigen::Ref<const Eigen::VectorXd>& values, int k) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  const int kk = std::min<int>(k, static_cast<int>(idx.size()));
  std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(),
                    [&](int a, int b) { return ranks_before(values(a), a, values(b), b); });
  idx.resize(kk);
  return idx;
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

std::vector<int> gather_patches(const SuperpointGraph& graph, std::span<const Point3> dense, int anchor,
                                const InstanceMask* mask, int cap) {
  std::vector<int> points;
  for (int s = 0; s < graph.k(); ++s) {
    if (mask && !mask->allowed(anchor, s)) continue;
    const auto& patch = graph.patch_of[graph.neighbor(anchor, s)];
    points.insert(points.end(), patch.begin(), patch.end());
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const Point3& seed = graph.superpoints[anchor];
  std::vector<std::pair<double, int>> order;
  order.reserve(points.size());
  for (int idx : points) order.emplace_back((dense[idx] - seed).squaredNorm(), idx);
  const std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(cap, 0)));
  std::partial_sort(order.begin(), order.begin() + keep, order.end());
  points.resize(keep);
  for (std::size_t i = 0; i < keep; ++i) points[i] = order[i].second;
  return points;
}

}  // namespace

std::vector<SuperpointCorrespondence> superpoint_match(const FeatureMatrix& zp, const FeatureMatrix& zq, int n_c) {
  if (zp.rows() == 0 || zq.rows() == 0 || zp.cols() == 0) {
    throw Error(ErrorCode::EmptyFeatures, "superpoint matching needs features on both sides");
  }
  if (zp.cols() != zq.cols()) throw Error(ErrorCode::ShapeMismatch, "feature dims differ");
  if (n_c < 1) throw Error(ErrorCode::InvalidArgument, "n_c must be >= 1");

  auto normalized = [](const FeatureMatrix& z) {
    FeatureMatrix out = z;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double n = out.row(r).norm();
      if (n > 0.0) out.row(r) /= n;
    }
    return out;
  };
  const Eigen::MatrixXd sim = normalized(zp) * normalized(zq).transpose();

  std::vector<SuperpointCorrespondence> all;
  all.reserve(sim.size());
  for (int i = 0; i < sim.rows(); ++i) {
    for (int j = 0; j < sim.cols(); ++j) all.push_back({i, j, std::clamp(sim(i, j), -1.0, 1.0)});
  }
  const std::size_t keep = std::min<std::size_t>(all.size(), static_cast<std::size_t>(n_c));
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.p_index != b.p_index) return a.p_index < b.p_index;
    return a.q_index < b.q_index;
  });
  all.resize(keep);
  return all;
}

InstanceCandidate expand_candidate(const SuperpointCorrespondence& corr, const SuperpointGraph& graph_p,
                                   const SuperpointGraph& graph_q, std::span<const Point3> dense_p,
                                   std::span<const Point3> dense_q, const InstanceMask& mask_q, int cap) {
  if (corr.p_index < 0 || corr.p_index >= graph_p.size() || corr.q_index < 0 || corr.q_index >= graph_q.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "seed correspondence outside the superpoint graphs");
  }
  if (mask_q.anchors() != graph_q.size() || mask_q.slots() != graph_q.k()) {
    throw Error(ErrorCode::ShapeMismatch, "scene mask must match the scene kNN table");
  }
  InstanceCandidate cand;
  cand.seed = corr;
  cand.p_points = gather_patches(graph_p, dense_p, corr.p_index, nullptr, cap);
  cand.q_points = gather_patches(graph_q, dense_q, corr.q_index, &mask_q, cap);
  return cand;
}

void SinkhornConfig::validate() const {
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "sinkhorn needs at least one iteration");
  if (mutual_k < 1) throw Error(ErrorCode::InvalidArgument, "mutual_k must be >= 1");
  if (!std::isfinite(dustbin_score)) throw Error(ErrorCode::InvalidArgument, "dustbin score must be finite");
}

Eigen::MatrixXd sinkhorn_log_assignment(const Eigen::MatrixXd& scores, double dustbin_score, int iterations) {
  const int n = static_cast<int>(scores.rows());
  const int m = static_cast<int>(scores.cols());
  if (n == 0 || m == 0) throw Error(ErrorCode::EmptySide, "sinkhorn needs both sides non-empty");
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "sinkhorn needs at least one iteration");
  if (!scores.allFinite()) throw Error(ErrorCode::InvalidArgument, "scores must be finite");

  Eigen::MatrixXd s(n + 1, m + 1);
  s.topLeftCorner(n, m) = scores;
  s.col(m).setConstant(dustbin_score);
  s.row(n).setConstant(dustbin_score);

  const double norm = -std::log(static_cast<double>(n + m));
  Eigen::VectorXd log_mu = Eigen::VectorXd::Constant(n + 1, norm);
  Eigen::VectorXd log_nu = Eigen::VectorXd::Constant(m + 1, norm);
  log_mu(n) = std::log(static_cast<double>(m)) + norm;
  log_nu(m) = std::log(static_cast<double>(n)) + norm;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m + 1);
  const double smax = s.maxCoeff();
  if (smax - s.minCoeff() <= kKernelRange) {
    const Eigen::MatrixXd kernel = (s.array() - smax).exp().matrix();
    const Eigen::VectorXd mu = log_mu.array().exp();
    const Eigen::VectorXd nu = log_nu.array().exp();
    Eigen::VectorXd a(n + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(m + 1);
    for (int it = 0; it < iterations; ++it) {
      a = mu.cwiseQuotient(kernel * b);
      b = nu.cwiseQuotient(kernel.transpose() * a);
    }
    u = a.array().log();
    v = b.array().log();
    u.array() -= smax;
  } else {
    for (int it = 0; it < iterations; ++it) {
      for (int i = 0; i <= n; ++i) u(i) = log_mu(i) - log_sum_exp(s.row(i).transpose() + v);
      for (int j = 0; j <= m; ++j) v(j) = log_nu(j) - log_sum_exp(s.col(j) + u);
    }
  }
  Eigen::MatrixXd out = s;
  out.colwise() += u;
  out.rowwise() += v.transpose();
  out.array() -= norm;
  return out;
}

std::vector<PointMatch> mutual_top_k(const Eigen::MatrixXd& assignment, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const int n = static_cast<int>(assignment.rows());
  const int m = static_cast<int>(assignment.cols());
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> in_row(n, m);
  in_row.setConstant(false);
  for (int i = 0; i < n; ++i) {
    for (int j : top_indices(assignment.row(i).transpose(), k)) in_row(i, j) = true;
  }
  std::vector<PointMatch> out;
  for (int j = 0; j < m; ++j) {
    for (int i : top_indices(assignment.col(j), k)) {
      if (in_row(i, j)) out.push_back({i, j, assignment(i, j)});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.p != b.p ? a.p < b.p : a.q < b.q; });
  return out;
}

std::vector<PointMatch> sinkhorn_match(const FeatureMatrix& feat_p, const FeatureMatrix& feat_q,
                                       const SinkhornConfig& cfg) {
  cfg.validate();
  if (feat_p.rows() == 0 || feat_q.rows() == 0) throw Error(ErrorCode::EmptySide, "sinkhorn needs both sides non-empty");
  if (feat_p.cols() != feat_q.cols()) throw Error(ErrorCode::ShapeMismatch, "point feature dims differ");
  const Eigen::MatrixXd scores = feat_p * feat_q.transpose() / std::sqrt(static_cast<double>(feat_p.cols()));
  const Eigen::MatrixXd log_z = sinkhorn_log_assignment(scores, cfg.dustbin_score, cfg.iterations);
  const Eigen::MatrixXd z = log_z.topLeftCorner(feat_p.rows(), feat_q.rows()).array().exp().matrix();
  return mutual_top_k(z, cfg.mutual_k);
}

void match_candidate(InstanceCandidate& cand, const FeatureMatrix& point_feat_p, const FeatureMatrix& point_feat_q,
                     const SinkhornConfig& cfg) {
  cand.point_corrs.clear();
  if (cand.p_points.empty() || cand.q_points.empty()) return;
  FeatureMatrix fp(cand.p_points.size(), point_feat_p.cols());
  FeatureMatrix fq(cand.q_points.size(), point_feat_q.cols());
  for (std::size_t i = 0; i < cand.p_points.size(); ++i) fp.row(i) = point_feat_p.row(cand.p_points[i]);
  for (std::size_t j = 0; j < cand.q_points.size(); ++j) fq.row(j) = point_feat_q.row(cand.q_points[j]);
  for (const auto& m : sinkhorn_match(fp, fq, cfg)) {
    cand.point_corrs.push_back({cand.p_points[m.p], cand.q_points[m.q], m.score});
  }
}

std::vector<Correspondence> to_correspondences(std::span<const PointMatch> matches, std::span<const Point3> dense_p,
                                               std::span<const Point3> dense_q) {
  std::vector<Correspondence> out;
  out.reserve(matches.size());
  for (const auto& m : matches) {
    if (m.p < 0 || m.q < 0 || static_cast<std::size_t>(m.p) >= dense_p.size() ||
        static_cast<std::size_t>(m.q) >= dense_q.size()) {
      throw Error(ErrorCode::IndexOutOfRange, "match refers to a missing point");
    }
    out.push_back({dense_p[m.p], dense_q[m.q], m.score});
  }
  return out;
}

RigidTransform candidate_pose(InstanceCandidate& cand, std::span<const Point3> dense_p,
                              std::span<const Point3> dense_q) {
  cand.pose.reset();
  if (cand.point_corrs.size() < 3) {
    throw Error(ErrorCode::TooFewCorrespondences, "a candidate pose needs at least three correspondences");
  }
  const auto corrs = to_correspondences(cand.point_corrs, dense_p, dense_q);
  cand.pose = weighted_svd(corrs);
  return *cand.pose;
}

}  // namespace instreg
