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

#include "crowdmimic/trajdata/pipeline.hpp"

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {

Dataset build_dataset(const std::vector<Tracklet>& tracklets,
                      const SceneSpec& scene, const DataPipelineOptions& opts) {
  Dataset data;
  data.scene = scene;
  for (const Tracklet& t : tracklets) {
    Tracklet r;
    try {
      r = resample(t, opts.src_fps, opts.dst_fps);
    } catch (const DataError&) {
      continue;  // too short after resampling
    }
    for (Episode& e : split_windows(r, opts.t1, opts.t2, opts.stride))
      data.episodes.push_back(std::move(e));
  }
  if (data.episodes.empty())
    throw DataError("dataset: no episodes (all tracklets too short)");
  for (const Episode& e : data.episodes) {
    for (const Vec2d& p : e.observed)
      if (!(p.x() >= 0 && p.x() <= 1 && p.y() >= 0 && p.y() <= 1))
        throw DataError("dataset: episode coordinate outside [0,1]");
    for (const Vec2d& p : e.future)
      if (!(p.x() >= 0 && p.x() <= 1 && p.y() >= 0 && p.y() <= 1))
        throw DataError("dataset: episode coordinate outside [0,1]");
  }
  assign_splits(data.episodes, opts.split_train, opts.split_val,
                opts.split_test);
  data.train = make_frame_batches(episodes_with_split(data.episodes, Split::Train),
                                  scene, opts.max_batch);
  data.val = make_frame_batches(episodes_with_split(data.episodes, Split::Val),
                                scene, opts.max_batch);
  data.test = make_frame_batches(episodes_with_split(data.episodes, Split::Test),
                                 scene, opts.max_batch);
  return data;
}

}  // namespace crowdmimic
