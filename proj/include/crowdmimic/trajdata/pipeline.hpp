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

#include "crowdmimic/trajdata/frame_batch.hpp"
#include "crowdmimic/trajdata/tracklet.hpp"

namespace crowdmimic {

struct DataPipelineOptions {
  double src_fps = 2.0;
  double dst_fps = 2.0;
  int t1 = kObservedLen;
  int t2 = kFutureLen;
  int stride = kObservedLen + kFutureLen;  // non-overlapping windows
  double split_train = 0.8;
  double split_val = 0.1;
  double split_test = 0.1;
  int max_batch = 16;
};

struct Dataset {
  SceneSpec scene;
  std::vector<Episode> episodes;
  std::vector<FrameBatch> train, val, test;

  const std::vector<FrameBatch>& batches(Split s) const {
    switch (s) {
      case Split::Train: return train;
      case Split::Val: return val;
      default: return test;
    }
  }
};

/// Resamples (dropping tracklets that degenerate), windows, splits by
/// tracklet and groups each split into frame batches. Asserts that every
/// episode coordinate lies in [0,1].
Dataset build_dataset(const std::vector<Tracklet>& tracklets,
                      const SceneSpec& scene, const DataPipelineOptions& opts);

}  // namespace crowdmimic
