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

#include <string>
#include <utility>
#include <vector>

#include "crowdmimic/core/types.hpp"
#include "crowdmimic/trajdata/scene.hpp"

namespace crowdmimic {

/// Displacement metrics over a set of predicted windows.
struct MetricReport {
  double norm_ade = 0;       // dimensionless fraction
  double ade_px = 0;
  double fde_px = 0;
  double collision_rate = 0;
  long long n_episodes = 0;

  /// Fixed-key JSON object with 6 decimal places; byte-deterministic.
  std::string to_json() const;
};

/// Mean Euclidean error per step in normalized coordinates.
double norm_ade(const std::vector<Vec2d>& pred, const std::vector<Vec2d>& gt);

/// Scales both windows back to pixels per axis; returns (ADE, FDE).
std::pair<double, double> ade_fde(const std::vector<Vec2d>& pred,
                                  const std::vector<Vec2d>& gt,
                                  const SceneSpec& scene);

/// One generated trajectory on the batch's shared clock: `start` is the
/// absolute step of the first generated position; points in pixels.
struct AlignedTrack {
  long long start = 0;
  std::vector<Vec2d> points_px;
};

/// Fraction of (timestep, unordered pair) combinations closer than
/// `thresh_px` among co-present generated agents. Tracks from different
/// batches must be rated in separate calls; 0 when there are no pairs.
double collision_rate(const std::vector<AlignedTrack>& tracks,
                      double thresh_px);

/// Violations and pair-step count, for pooling across batches.
std::pair<long long, long long> collision_counts(
    const std::vector<AlignedTrack>& tracks, double thresh_px);

}  // namespace crowdmimic
