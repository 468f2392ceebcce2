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

#include "crowdmimic/trajdata/scene.hpp"

#include <algorithm>
#include <limits>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {

void SceneSpec::validate() const {
  if (width_px <= 0 || height_px <= 0)
    throw ConfigError("scene: width_px and height_px must be positive");
  if (collision_thresh_px <= 0)
    throw ConfigError("scene: collision_thresh_px must be positive");
  if (vicinity_cells <= 0)
    throw ConfigError("scene: vicinity_cells must be positive");
  if (vicinity_extent_px <= 0)
    throw ConfigError("scene: vicinity_extent_px must be positive");
  if (collision_thresh_px >= vicinity_extent_px)
    throw ConfigError(
        "scene: collision_thresh_px must be smaller than vicinity_extent_px");
  for (std::size_t i = 0; i < exits.size(); ++i) {
    const ExitRegion& e = exits[i];
    if (e.x0 > e.x1 || e.y0 > e.y1)
      throw ConfigError("scene: exit " + std::to_string(e.id) +
                        " has an inverted rectangle");
    if (e.x0 < 0 || e.y0 < 0 || e.x1 > width_px || e.y1 > height_px)
      throw ConfigError("scene: exit " + std::to_string(e.id) +
                        " lies outside the scene bounds");
    for (std::size_t j = i + 1; j < exits.size(); ++j) {
      const ExitRegion& f = exits[j];
      if (e.id == f.id)
        throw ConfigError("scene: duplicate exit id " + std::to_string(e.id));
      if (e.x0 == f.x0 && e.y0 == f.y0 && e.x1 == f.x1 && e.y1 == f.y1)
        throw ConfigError("scene: exits " + std::to_string(e.id) + " and " +
                          std::to_string(f.id) + " are identical rectangles");
    }
  }
}

const ExitRegion& SceneSpec::exit_by_id(int id) const {
  for (const ExitRegion& e : exits)
    if (e.id == id) return e;
  throw ConfigError("scene: no exit with id " + std::to_string(id));
}

int SceneSpec::nearest_exit_id(const Vec2d& px) const {
  if (exits.empty()) throw ConfigError("scene: no exits defined");
  int best = exits.front().id;
  double best_d = std::numeric_limits<double>::infinity();
  for (const ExitRegion& e : exits) {
    double d = (e.center() - px).norm();
    if (d < best_d || (d == best_d && e.id < best)) {
      best_d = d;
      best = e.id;
    }
  }
  return best;
}

SceneSpec scene_from_config(const Config& cfg, const std::string& prefix) {
  SceneSpec scene;
  scene.width_px = cfg.int_or(prefix + "width_px", 0);
  scene.height_px = cfg.int_or(prefix + "height_px", 0);
  scene.collision_thresh_px = cfg.num_or(prefix + "collision_thresh_px", 0);
  scene.vicinity_cells = cfg.int_or(prefix + "vicinity_cells", 4);
  scene.vicinity_extent_px = cfg.num_or(prefix + "vicinity_extent_px", 32.0);
  for (const std::string& key : cfg.keys_with_prefix(prefix + "exit.")) {
    std::string id_part = key.substr(prefix.size() + 5);
    ExitRegion e;
    try {
      e.id = std::stoi(id_part);
    } catch (const std::exception&) {
      throw ConfigError("scene: bad exit key: " + key);
    }
    std::vector<double> rect = cfg.list(key);
    if (rect.size() != 4)
      throw ConfigError("scene: exit rectangle must have 4 entries: " + key);
    e.x0 = rect[0];
    e.y0 = rect[1];
    e.x1 = rect[2];
    e.y1 = rect[3];
    scene.exits.push_back(e);
  }
  std::sort(scene.exits.begin(), scene.exits.end(),
            [](const ExitRegion& a, const ExitRegion& b) { return a.id < b.id; });
  scene.validate();
  return scene;
}

SceneSpec load_scene(const std::string& path) {
  Config cfg = Config::parse_file(path);
  SceneSpec scene = scene_from_config(cfg);
  cfg.require_all_consumed();
  return scene;
}

void scene_to_config(const SceneSpec& scene, Config& cfg,
                     const std::string& prefix) {
  cfg.set_num(prefix + "width_px", scene.width_px);
  cfg.set_num(prefix + "height_px", scene.height_px);
  cfg.set_num(prefix + "collision_thresh_px", scene.collision_thresh_px);
  cfg.set_num(prefix + "vicinity_cells", scene.vicinity_cells);
  cfg.set_num(prefix + "vicinity_extent_px", scene.vicinity_extent_px);
  for (const ExitRegion& e : scene.exits)
    cfg.set_list(prefix + "exit." + std::to_string(e.id),
                 {e.x0, e.y0, e.x1, e.y1});
}

}  // namespace crowdmimic
