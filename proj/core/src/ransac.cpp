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

#include "instreg/ransac.hpp"

#include <array>
#include <random>

#include "instreg/error.hpp"

namespace instreg {
namespace {

// Single-precision coordinate arrays so the scoring loop runs four lanes wide.
// Rounding moves residuals by ~1e-7 of the coordinate magnitude.
struct CorrArrays {
  std::vector<float> sx, sy, sz, tx, ty, tz;

  explicit CorrArrays(const std::vector<Correspondence>& corrs) {
    for (auto* v : {&sx, &sy, &sz, &tx, &ty, &tz}) v->resize(corrs.size());
    for (std::size_t i = 0; i < corrs.size(); ++i) {
      sx[i] = static_cast<float>(corrs[i].source.x());
      sy[i] = static_cast<float>(corrs[i].source.y());
      sz[i] = static_cast<float>(corrs[i].source.z());
      tx[i] = static_cast<float>(corrs[i].target.x());
      ty[i] = static_cast<float>(corrs[i].target.y());
      tz[i] = static_cast<float>(corrs[i].target.z());
    }
  }
};

struct FloatPose {
  float r[9];
  float t[3];

  explicit FloatPose(const RigidTransform& pose) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r[3 * i + j] = static_cast<float>(pose.rotation(i, j));
      t[i] = static_cast<float>(pose.translation(i));
    }
  }
};

int inlier_count(const RigidTransform& pose, const CorrArrays& a, float tau2_sq) {
  const FloatPose p(pose);
  const float* sx = a.sx.data();
  const float* sy = a.sy.data();
  const float* sz = a.sz.data();
  const float* tx = a.tx.data();
  const float* ty = a.ty.data();
  const float* tz = a.tz.data();
  const std::size_t n = a.sx.size();
  // Integral float sums stay exact well beyond any correspondence count seen here.
  float count = 0.0f;
  for (std::size_t i = 0; i < n; ++i) {
    const float dx = p.r[0] * sx[i] + p.r[1] * sy[i] + p.r[2] * sz[i] + p.t[0] - tx[i];
    const float dy = p.r[3] * sx[i] + p.r[4] * sy[i] + p.r[5] * sz[i] + p.t[1] - ty[i];
    const float dz = p.r[6] * sx[i] + p.r[7] * sy[i] + p.r[8] * sz[i] + p.t[2] - tz[i];
    count += (dx * dx + dy * dy + dz * dz < tau2_sq) ? 1.0f : 0.0f;
  }
  return static_cast<int>(count);
}

std::vector<int> inliers_of(const RigidTransform& pose, const CorrArrays& a, float tau2_sq) {
  const FloatPose p(pose);
  std::vector<int> out;
  for (std::size_t i = 0; i < a.sx.size(); ++i) {
    const float dx = p.r[0] * a.sx[i] + p.r[1] * a.sy[i] + p.r[2] * a.sz[i] + p.t[0] - a.tx[i];
    const float dy = p.r[3] * a.sx[i] + p.r[4] * a.sy[i] + p.r[5] * a.sz[i] + p.t[1] - a.ty[i];
    const float dz = p.r[6] * a.sx[i] + p.r[7] * a.sy[i] + p.r[8] * a.sz[i] + p.t[2] - a.tz[i];
    if (dx * dx + dy * dy + dz * dz < tau2_sq) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

void RansacConfig::validate() const {
  if (!(tau2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be > 0");
  if (max_models < 0) throw Error(ErrorCode::InvalidArgument, "max_models must be >= 0");
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
}

std::vector<RigidTransform> sequential_ransac(std::span<const Correspondence> corrs, const RansacConfig& cfg) {
  cfg.validate();
  std::vector<Correspondence> remaining;
  for (const auto& c : corrs) remaining.push_back({c.source, c.target, 1.0});
  std::mt19937_64 rng(cfg.seed);
  std::vector<RigidTransform> models;

  const float tau2_sq = static_cast<float>(cfg.tau2 * cfg.tau2);

  while (static_cast<int>(models.size()) < cfg.max_models && remaining.size() >= 3) {
    const CorrArrays arrays(remaining);
    std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    int best_count = 0;
    RigidTransform best;
    for (int it = 0; it < cfg.iterations; ++it) {
      std::array<std::size_t, 3> idx{pick(rng), pick(rng), pick(rng)};
      if (idx[0] == idx[1] || idx[0] == idx[2] || idx[1] == idx[2]) continue;
      const std::array<Correspondence, 3> sample{remaining[idx[0]], remaining[idx[1]], remaining[idx[2]]};
      RigidTransform hyp;
      try {
        hyp = weighted_svd(sample);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateConfiguration) throw;
        continue;
      }
      const int count = inlier_count(hyp, arrays, tau2_sq);
      if (count > best_count) {
        best_count = count;
        best = hyp;
      }
    }
    if (best_count < 3) break;

    std::vector<int> inl = inliers_of(best, arrays, tau2_sq);
    std::vector<Correspondence> support;
    for (int i : inl) support.push_back(remaining[i]);
    try {
      const RigidTransform refit = weighted_svd(support);
      const std::vector<int> refit_inl = inliers_of(refit, arrays, tau2_sq);
      if (refit_inl.size() >= inl.size()) {
        best = refit;
        inl = refit_inl;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateConfiguration) throw;
    }
    models.push_back(best);

    std::vector<char> drop(remaining.size(), 0);
    for (int i : inl) drop[i] = 1;
    std::vector<Correspondence> next;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (!drop[i]) next.push_back(remaining[i]);
    }
    remaining.swap(next);
  }
  return models;
}

}  // namespace instreg
