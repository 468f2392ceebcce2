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
#include <vector>

#include "crowdmimic/core/types.hpp"
#include "crowdmimic/trajdata/scene.hpp"

namespace crowdmimic {

/// One tracked pedestrian path. Coordinates are normalized per axis to
/// [0,1]; `start_frame` counts uniformly spaced samples on the source clock
/// (the loader divides raw frame numbers by the dataset's frame spacing).
struct Tracklet {
  long long id = 0;
  long long start_frame = 0;
  std::vector<Vec2d> points;
  int goal_exit = 0;  // 0 = unknown; synthetic data records the goal
};

enum class Split { Train, Val, Test };

/// One training/eval unit: a contiguous window of a tracklet split into an
/// observed part and a future part. `t0` is the window start on the
/// resampled clock shared by all episodes of a dataset.
struct Episode {
  long long tracklet_id = 0;
  long long t0 = 0;
  std::vector<Vec2d> observed;
  std::vector<Vec2d> future;
  Split split = Split::Train;
  int goal_exit = 0;
};

/// Ground-truth position at a window-local step (observed then future).
inline const Vec2d& episode_gt_pos(const Episode& e, int local_t) {
  int t1 = static_cast<int>(e.observed.size());
  return local_t < t1 ? e.observed[static_cast<std::size_t>(local_t)]
                      : e.future[static_cast<std::size_t>(local_t - t1)];
}

/// Reads the tracklet CSV (`id,frame,x,y[,goal_exit]`, pixel coordinates).
/// Points are normalized per axis; coordinates within a 2 px slack outside
/// the scene are clamped to the bounds, anything further is a parse error.
/// Rows of one id must be frame-ascending with uniform spacing.
std::vector<Tracklet> load_tracklets(const std::string& path,
                                     const SceneSpec& scene);

/// Writes tracklets back to the CSV schema (pixels). A `goal_exit` column
/// is emitted when any tracklet carries a goal. Output is byte-deterministic.
void save_tracklets_csv(const std::string& path,
                        const std::vector<Tracklet>& tracklets,
                        const SceneSpec& scene);

/// Keeps every round(src_fps/dst_fps)-th point starting at the first and
/// rescales `start_frame` to the resampled clock. Throws DataError when the
/// result has fewer than 2 points.
Tracklet resample(const Tracklet& t, double src_fps, double dst_fps);

/// Emits one episode per window start 0, stride, 2*stride, ... while the
/// whole window fits. Tracklets shorter than t1+t2 yield an empty list.
std::vector<Episode> split_windows(const Tracklet& t, int t1, int t2,
                                   int stride);

/// Tags episodes train/val/test by source tracklet, cutting the ordered
/// tracklet list at the cumulative fractions.
void assign_splits(std::vector<Episode>& episodes, double train_frac,
                   double val_frac, double test_frac);

std::vector<Episode> episodes_with_split(const std::vector<Episode>& episodes,
                                         Split split);

}  // namespace crowdmimic
