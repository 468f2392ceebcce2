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

#include "crowdmimic/core/config.hpp"
#include "crowdmimic/core/types.hpp"

namespace crowdmimic {

/// Axis-aligned entrance/exit region in pixel coordinates.
struct ExitRegion {
  int id = 0;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  Vec2d center() const { return Vec2d(0.5 * (x0 + x1), 0.5 * (y0 + y1)); }
  bool contains(const Vec2d& px) const {
    return px.x() >= x0 && px.x() <= x1 && px.y() >= y0 && px.y() <= y1;
  }
};

/// Scene constants: image size, labeled exits, collision threshold and the
/// neighborhood grid used by the social layer.
struct SceneSpec {
  int width_px = 0;
  int height_px = 0;
  std::vector<ExitRegion> exits;
  double collision_thresh_px = 0;
  int vicinity_cells = 0;
  double vicinity_extent_px = 0;

  /// Throws ConfigError if any invariant is violated.
  void validate() const;

  Vec2d to_norm(const Vec2d& px) const {
    return Vec2d(px.x() / width_px, px.y() / height_px);
  }
  Vec2d to_px(const Vec2d& norm) const {
    return Vec2d(norm.x() * width_px, norm.y() * height_px);
  }

  const ExitRegion& exit_by_id(int id) const;
  /// Exit whose center is closest to `px` (ties: lowest id).
  int nearest_exit_id(const Vec2d& px) const;
};

/// Reads a scene file: `width_px`, `height_px`, `collision_thresh_px`,
/// `vicinity_cells`, `vicinity_extent_px` and one `exit.<k> = [x0,y0,x1,y1]`
/// entry per region.
SceneSpec load_scene(const std::string& path);
SceneSpec scene_from_config(const Config& cfg, const std::string& prefix = "");
void scene_to_config(const SceneSpec& scene, Config& cfg,
                     const std::string& prefix = "");

}  // namespace crowdmimic
