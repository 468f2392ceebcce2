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

#include <vector>

#include "crowdmimic/trajdata/scene.hpp"
#include "crowdmimic/trajdata/tracklet.hpp"

namespace crowdmimic {

struct NeighborRef {
  int other = 0;       // index into FrameBatch::episodes
  Vec2d offset_px{0, 0};  // ground-truth position of `other` minus own, pixels
};

/// Episodes whose windows overlap in time, decoded in lockstep so the
/// collision gate and the vicinity layer see the whole group at each step.
/// `neighbor_index[i][t]` lists the episodes co-present with episode i at
/// its window-local step t, with ground-truth pixel offsets.
struct FrameBatch {
  std::vector<Episode> episodes;
  std::vector<std::vector<std::vector<NeighborRef>>> neighbor_index;
  int t1 = 0;
  int t2 = 0;

  int size() const { return static_cast<int>(episodes.size()); }
  int window_len() const { return t1 + t2; }
};

/// Greedily groups episodes (in input order) whose windows all pairwise
/// overlap, capped at `max_batch`; every episode lands in exactly one batch.
std::vector<FrameBatch> make_frame_batches(const std::vector<Episode>& episodes,
                                           const SceneSpec& scene,
                                           int max_batch);

}  // namespace crowdmimic
