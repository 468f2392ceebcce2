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

/// One episode's overlay: observed window, ground-truth future and one
/// generated future per latent code (at most 3). Normalized coordinates.
struct RenderEpisode {
  std::vector<Vec2d> observed;
  std::vector<Vec2d> ground_truth;
  std::vector<std::vector<Vec2d>> code_futures;
};

/// Writes an SVG 1.1 image: dark background, outlined exit regions, one
/// polyline per trajectory (observed yellow, ground truth white, codes
/// red/green/blue). Byte-deterministic for fixed inputs.
void render_scene(const SceneSpec& scene,
                  const std::vector<RenderEpisode>& episodes,
                  const std::string& out_path);

}  // namespace crowdmimic
