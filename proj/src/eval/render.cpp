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

#include "crowdmimic/eval/render.hpp"

#include <cstdio>
#include <fstream>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {
namespace {

constexpr const char* kCodeColors[3] = {"#ff0000", "#00ff00", "#0000ff"};
constexpr const char* kObservedColor = "#ffff00";
constexpr const char* kGroundTruthColor = "#ffffff";
constexpr const char* kBackground = "#202020";
constexpr const char* kExitColor = "#808080";

void write_polyline(std::ofstream& out, const SceneSpec& scene,
                    const std::vector<Vec2d>& points, const char* color) {
  if (points.empty()) return;
  out << "  <polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
  char buf[64];
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec2d px = scene.to_px(points[i]);
    std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", px.x(),
                  px.y());
    out << buf;
  }
  out << "\"/>\n";
}

}  // namespace

void render_scene(const SceneSpec& scene,
                  const std::vector<RenderEpisode>& episodes,
                  const std::string& out_path) {
  for (const RenderEpisode& e : episodes)
    if (e.code_futures.size() > 3)
      throw ConfigError("render_scene: the palette supports at most 3 codes");

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + out_path);

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << scene.width_px << "\" height=\"" << scene.height_px
      << "\" viewBox=\"0 0 " << scene.width_px << " " << scene.height_px
      << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << scene.width_px
      << "\" height=\"" << scene.height_px << "\" fill=\"" << kBackground
      << "\"/>\n";
  char buf[160];
  for (const ExitRegion& e : scene.exits) {
    std::snprintf(buf, sizeof(buf),
                  "  <rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\""
                  " fill=\"none\" stroke=\"%s\" stroke-width=\"1\"/>\n",
                  e.x0, e.y0, e.x1 - e.x0, e.y1 - e.y0, kExitColor);
    out << buf;
  }
  for (const RenderEpisode& e : episodes) {
    write_polyline(out, scene, e.observed, kObservedColor);
    write_polyline(out, scene, e.ground_truth, kGroundTruthColor);
    for (std::size_t k = 0; k < e.code_futures.size(); ++k)
      write_polyline(out, scene, e.code_futures[k], kCodeColors[k]);
  }
  out << "</svg>\n";
  if (!out) throw IoError("failed writing image: " + out_path);
}

}  // namespace crowdmimic
