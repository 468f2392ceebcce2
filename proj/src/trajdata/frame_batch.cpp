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

#include "crowdmimic/trajdata/frame_batch.hpp"

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {
namespace {

bool windows_overlap(const Episode& a, const Episode& b, int window_len) {
  return a.t0 < b.t0 + window_len && b.t0 < a.t0 + window_len;
}

}  // namespace

std::vector<FrameBatch> make_frame_batches(const std::vector<Episode>& episodes,
                                           const SceneSpec& scene,
                                           int max_batch) {
  if (max_batch < 1) throw ConfigError("make_frame_batches: max_batch >= 1");
  std::vector<FrameBatch> batches;
  if (episodes.empty()) return batches;
  const int t1 = static_cast<int>(episodes.front().observed.size());
  const int t2 = static_cast<int>(episodes.front().future.size());
  const int window = t1 + t2;
  for (const Episode& e : episodes)
    if (static_cast<int>(e.observed.size()) != t1 ||
        static_cast<int>(e.future.size()) != t2)
      throw DataError("make_frame_batches: episodes have mixed window shapes");

  std::vector<bool> assigned(episodes.size(), false);
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    if (assigned[i]) continue;
    FrameBatch batch;
    batch.t1 = t1;
    batch.t2 = t2;
    batch.episodes.push_back(episodes[i]);
    assigned[i] = true;
    for (std::size_t j = i + 1;
         j < episodes.size() && batch.size() < max_batch; ++j) {
      if (assigned[j]) continue;
      bool fits = true;
      for (const Episode& member : batch.episodes)
        if (!windows_overlap(member, episodes[j], window)) {
          fits = false;
          break;
        }
      if (fits) {
        batch.episodes.push_back(episodes[j]);
        assigned[j] = true;
      }
    }

    // Co-presence index with ground-truth offsets, per window-local step.
    batch.neighbor_index.assign(
        static_cast<std::size_t>(batch.size()),
        std::vector<std::vector<NeighborRef>>(static_cast<std::size_t>(window)));
    for (int a = 0; a < batch.size(); ++a) {
      const Episode& ea = batch.episodes[static_cast<std::size_t>(a)];
      for (int t = 0; t < window; ++t) {
        long long tau = ea.t0 + t;
        for (int b = 0; b < batch.size(); ++b) {
          if (b == a) continue;
          const Episode& eb = batch.episodes[static_cast<std::size_t>(b)];
          long long local_b = tau - eb.t0;
          if (local_b < 0 || local_b >= window) continue;
          Vec2d off =
              scene.to_px(episode_gt_pos(eb, static_cast<int>(local_b))) -
              scene.to_px(episode_gt_pos(ea, t));
          batch.neighbor_index[static_cast<std::size_t>(a)]
                              [static_cast<std::size_t>(t)]
                                  .push_back(NeighborRef{b, off});
        }
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace crowdmimic
