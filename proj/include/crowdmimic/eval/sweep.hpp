// Copyright 2026 The Crowdmimic Authors
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

#include <cstdio>
#include <string>
#include <vector>

#include "crowdmimic/core/parallel.hpp"
#include "crowdmimic/policy/rollout.hpp"

namespace crowdmimic {

/// Result of iterating a coded policy over every code configuration.
/// Deviations measure how far each generated endpoint strays from the
/// straight ray between the last observed point and the episode's exit
/// center (the assigned goal when labeled, else the exit nearest to the
/// ground-truth endpoint).
struct IntentSweep {
  int code_dim = 0;
  std::vector<std::string> episode_ids;
  MatXd dev_px;                                  // episodes x codes
  std::vector<std::vector<Vec2d>> endpoints_px;  // per episode, per code
  VecXd mean_dev_px;                             // per code
  std::vector<Vec2d> mean_endpoint_px;           // per code
  double max_endpoint_separation_px = 0;  // between per-code mean endpoints
  int majority_code = 0;       // code picked most often as per-episode argmin
  double alignment_accuracy = 0;  // share of episodes agreeing with it

  std::string to_csv() const {
    std::string out = "episode_id,code,dev_px,endpoint_x,endpoint_y\n";
    char buf[160];
    for (std::size_t e = 0; e < episode_ids.size(); ++e)
      for (int k = 0; k < code_dim; ++k) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.4f,%.4f,%.4f\n",
                      episode_ids[e].c_str(), k,
                      dev_px(static_cast<Eigen::Index>(e), k),
                      endpoints_px[e][static_cast<std::size_t>(k)].x(),
                      endpoints_px[e][static_cast<std::size_t>(k)].y());
        out += buf;
      }
    return out;
  }
};

/// Perpendicular distance of `point` from the line through `origin` toward
/// `target` (all pixels). Falls back to plain distance when the ray is
/// degenerate.
inline double ray_deviation_px(const Vec2d& origin, const Vec2d& target,
                               const Vec2d& point) {
  Vec2d dir = target - origin;
  double len = dir.norm();
  if (len == 0) return (point - origin).norm();
  Vec2d rel = point - origin;
  return std::abs(dir.x() * rel.y() - dir.y() * rel.x()) / len;
}

/// Deterministic rollouts under every code configuration. The gate and
/// vicinity layers stay active per `opts`.
template <class Scalar>
IntentSweep intention_sweep(const PolicyNet<Scalar>& net,
                            const std::vector<FrameBatch>& batches,
                            const SceneSpec& scene, int code_dim,
                            const RolloutOptions& opts, int workers = 1) {
  if (code_dim < 1 || code_dim != net.code_dim)
    throw ConfigError("intention_sweep: policy was not trained with " +
                      std::to_string(code_dim) + " codes");
  RolloutOptions det = opts;
  det.stochastic = false;

  IntentSweep sweep;
  sweep.code_dim = code_dim;

  long long n_eps = 0;
  for (const FrameBatch& b : batches) n_eps += b.size();
  sweep.dev_px.resize(n_eps, code_dim);
  sweep.endpoints_px.assign(static_cast<std::size_t>(n_eps),
                            std::vector<Vec2d>(static_cast<std::size_t>(code_dim)));

  // Episode ids and rays, in batch order.
  std::vector<Vec2d> origins, targets;
  for (const FrameBatch& b : batches)
    for (const Episode& e : b.episodes) {
      sweep.episode_ids.push_back(std::to_string(e.tracklet_id) + "_" +
                                  std::to_string(e.t0));
      Vec2d origin = scene.to_px(e.observed.back());
      int exit_id = e.goal_exit > 0
                        ? e.goal_exit
                        : scene.nearest_exit_id(scene.to_px(e.future.back()));
      origins.push_back(origin);
      targets.push_back(scene.exit_by_id(exit_id).center());
    }

  for (int k = 0; k < code_dim; ++k) {
    std::vector<std::vector<RolloutResult>> all(batches.size());
    parallel_for(batches.size(), workers, [&](std::size_t bi) {
      std::vector<int> codes(static_cast<std::size_t>(batches[bi].size()), k);
      all[bi] = rollout_batch(net, batches[bi], scene, codes, det, nullptr,
                              (BatchTape<Scalar>*)nullptr);
    });
    long long at = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi)
      for (const RolloutResult& r : all[bi]) {
        Vec2d endpoint = scene.to_px(r.actions.back());
        sweep.endpoints_px[static_cast<std::size_t>(at)]
                          [static_cast<std::size_t>(k)] = endpoint;
        sweep.dev_px(at, k) = ray_deviation_px(
            origins[static_cast<std::size_t>(at)],
            targets[static_cast<std::size_t>(at)], endpoint);
        ++at;
      }
  }

  sweep.mean_dev_px = sweep.dev_px.colwise().mean();
  sweep.mean_endpoint_px.assign(static_cast<std::size_t>(code_dim),
                                Vec2d(0, 0));
  for (long long e = 0; e < n_eps; ++e)
    for (int k = 0; k < code_dim; ++k)
      sweep.mean_endpoint_px[static_cast<std::size_t>(k)] +=
          sweep.endpoints_px[static_cast<std::size_t>(e)]
                            [static_cast<std::size_t>(k)] /
          static_cast<double>(n_eps);
  for (int a = 0; a < code_dim; ++a)
    for (int b = a + 1; b < code_dim; ++b)
      sweep.max_endpoint_separation_px = std::max(
          sweep.max_endpoint_separation_px,
          (sweep.mean_endpoint_px[static_cast<std::size_t>(a)] -
           sweep.mean_endpoint_px[static_cast<std::size_t>(b)])
              .norm());

  // Per-episode winner and its dataset-wide majority.
  std::vector<long long> votes(static_cast<std::size_t>(code_dim), 0);
  std::vector<int> winner(static_cast<std::size_t>(n_eps), 0);
  for (long long e = 0; e < n_eps; ++e) {
    int best = 0;
    for (int k = 1; k < code_dim; ++k)
      if (sweep.dev_px(e, k) < sweep.dev_px(e, best)) best = k;
    winner[static_cast<std::size_t>(e)] = best;
    ++votes[static_cast<std::size_t>(best)];
  }
  for (int k = 1; k < code_dim; ++k)
    if (votes[static_cast<std::size_t>(k)] >
        votes[static_cast<std::size_t>(sweep.majority_code)])
      sweep.majority_code = k;
  long long agree = 0;
  for (int w : winner)
    if (w == sweep.majority_code) ++agree;
  sweep.alignment_accuracy =
      n_eps > 0 ? static_cast<double>(agree) / static_cast<double>(n_eps) : 1.0;
  return sweep;
}

}  // namespace crowdmimic
