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

#include "crowdmimic/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {

std::string MetricReport::to_json() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"norm_ade\": %.6f, \"ade_px\": %.6f, \"fde_px\": %.6f, "
                "\"collision_rate\": %.6f, \"n_episodes\": %lld}",
                norm_ade, ade_px, fde_px, collision_rate, n_episodes);
  return buf;
}

double norm_ade(const std::vector<Vec2d>& pred, const std::vector<Vec2d>& gt) {
  if (pred.size() != gt.size() || pred.empty())
    throw DataError("norm_ade: prediction and ground truth lengths differ");
  double sum = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) sum += (pred[t] - gt[t]).norm();
  return sum / static_cast<double>(pred.size());
}

std::pair<double, double> ade_fde(const std::vector<Vec2d>& pred,
                                  const std::vector<Vec2d>& gt,
                                  const SceneSpec& scene) {
  if (pred.size() != gt.size() || pred.empty())
    throw DataError("ade_fde: prediction and ground truth lengths differ");
  double sum = 0;
  double last = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    last = (scene.to_px(pred[t]) - scene.to_px(gt[t])).norm();
    sum += last;
  }
  return {sum / static_cast<double>(pred.size()), last};
}

std::pair<long long, long long> collision_counts(
    const std::vector<AlignedTrack>& tracks, double thresh_px) {
  long long violations = 0;
  long long pair_steps = 0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = i + 1; j < tracks.size(); ++j) {
      const AlignedTrack& a = tracks[i];
      const AlignedTrack& b = tracks[j];
      long long lo = std::max(a.start, b.start);
      long long hi = std::min(a.start + static_cast<long long>(a.points_px.size()),
                              b.start + static_cast<long long>(b.points_px.size()));
      for (long long tau = lo; tau < hi; ++tau) {
        ++pair_steps;
        const Vec2d& pa = a.points_px[static_cast<std::size_t>(tau - a.start)];
        const Vec2d& pb = b.points_px[static_cast<std::size_t>(tau - b.start)];
        if ((pa - pb).norm() < thresh_px) ++violations;
      }
    }
  }
  return {violations, pair_steps};
}

double collision_rate(const std::vector<AlignedTrack>& tracks,
                      double thresh_px) {
  auto [violations, pair_steps] = collision_counts(tracks, thresh_px);
  return pair_steps == 0
             ? 0.0
             : static_cast<double>(violations) / static_cast<double>(pair_steps);
}

}  // namespace crowdmimic
