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

#include "crowdmimic/trajdata/tracklet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unordered_map>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {
namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ParseError(path, line, "not a number: '" + s + "'");
  return v;
}

long long parse_ll(const std::string& s, const std::string& path, int line) {
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw ParseError(path, line, "not an integer: '" + s + "'");
  return v;
}

double clamp_axis(double v, double lo, double hi, double slack,
                  const std::string& path, int line) {
  if (v < lo - slack || v > hi + slack)
    throw ParseError(path, line, "coordinate outside scene bounds");
  return std::clamp(v, lo, hi);
}

}  // namespace

std::vector<Tracklet> load_tracklets(const std::string& path,
                                     const SceneSpec& scene) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tracklet file: " + path);

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw DataError("empty tracklet file: " + path);
  ++lineno;
  std::vector<std::string> header = split_csv_row(line);
  bool has_goal = false;
  if (header.size() == 5 && header[4] == "goal_exit")
    has_goal = true;
  else if (header.size() != 4)
    throw ParseError(path, lineno, "expected header id,frame,x,y[,goal_exit]");
  if (header[0] != "id" || header[1] != "frame" || header[2] != "x" ||
      header[3] != "y")
    throw ParseError(path, lineno, "expected header id,frame,x,y[,goal_exit]");

  struct Raw {
    std::vector<long long> frames;
    std::vector<Vec2d> points;
    int goal_exit = 0;
    std::size_t order = 0;
  };
  std::unordered_map<long long, Raw> by_id;
  std::vector<long long> id_order;

  constexpr double kSlackPx = 2.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> f = split_csv_row(line);
    if (f.size() != header.size())
      throw ParseError(path, lineno, "wrong number of fields");
    long long id = parse_ll(f[0], path, lineno);
    long long frame = parse_ll(f[1], path, lineno);
    double x = clamp_axis(parse_double(f[2], path, lineno), 0.0,
                          scene.width_px, kSlackPx, path, lineno);
    double y = clamp_axis(parse_double(f[3], path, lineno), 0.0,
                          scene.height_px, kSlackPx, path, lineno);
    auto [it, inserted] = by_id.try_emplace(id);
    Raw& raw = it->second;
    if (inserted) {
      raw.order = id_order.size();
      id_order.push_back(id);
    }
    if (!raw.frames.empty() && frame <= raw.frames.back())
      throw ParseError(path, lineno, "frames not ascending for id " +
                                         std::to_string(id));
    raw.frames.push_back(frame);
    raw.points.emplace_back(x / scene.width_px, y / scene.height_px);
    if (has_goal) raw.goal_exit = static_cast<int>(parse_ll(f[4], path, lineno));
  }
  if (id_order.empty()) throw DataError("no tracklet rows in " + path);

  // All tracklets must share one uniform frame spacing so that start frames
  // are comparable on a common sample clock.
  long long delta = 0;
  for (long long id : id_order) {
    const Raw& raw = by_id[id];
    for (std::size_t i = 1; i < raw.frames.size(); ++i) {
      long long d = raw.frames[i] - raw.frames[i - 1];
      if (delta == 0)
        delta = d;
      else if (d != delta)
        throw ParseError(path, 0,
                         "non-uniform frame spacing (id " + std::to_string(id) +
                             "): expected step " + std::to_string(delta));
    }
  }
  if (delta == 0) delta = 1;  // only single-point tracklets

  std::vector<Tracklet> out;
  out.reserve(id_order.size());
  for (long long id : id_order) {
    Raw& raw = by_id[id];
    if (raw.points.size() < 2) continue;  // tracker noise, nothing to window
    Tracklet t;
    t.id = id;
    t.start_frame = static_cast<long long>(
        std::llround(static_cast<double>(raw.frames.front()) /
                     static_cast<double>(delta)));
    t.points = std::move(raw.points);
    t.goal_exit = raw.goal_exit;
    out.push_back(std::move(t));
  }
  if (out.empty()) throw DataError("no usable tracklets in " + path);
  return out;
}

void save_tracklets_csv(const std::string& path,
                        const std::vector<Tracklet>& tracklets,
                        const SceneSpec& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tracklet file: " + path);
  bool has_goal = std::any_of(tracklets.begin(), tracklets.end(),
                              [](const Tracklet& t) { return t.goal_exit != 0; });
  out << (has_goal ? "id,frame,x,y,goal_exit\n" : "id,frame,x,y\n");
  char buf[128];
  for (const Tracklet& t : tracklets) {
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      Vec2d px = scene.to_px(t.points[i]);
      long long frame = t.start_frame + static_cast<long long>(i);
      if (has_goal)
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%.4f,%.4f,%d\n", t.id, frame,
                      px.x(), px.y(), t.goal_exit);
      else
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%.4f,%.4f\n", t.id, frame,
                      px.x(), px.y());
      out << buf;
    }
  }
  if (!out) throw IoError("failed writing tracklet file: " + path);
}

Tracklet resample(const Tracklet& t, double src_fps, double dst_fps) {
  if (!(src_fps >= dst_fps) || !(dst_fps > 0))
    throw ConfigError("resample: need src_fps >= dst_fps > 0");
  // Ties round to even: 25 fps -> 2 fps is a stride of 12.
  long long stride = std::llrint(src_fps / dst_fps);
  if (stride < 1) stride = 1;
  Tracklet out;
  out.id = t.id;
  out.goal_exit = t.goal_exit;
  out.start_frame = static_cast<long long>(
      std::llround(static_cast<double>(t.start_frame) /
                   static_cast<double>(stride)));
  for (std::size_t i = 0; i < t.points.size();
       i += static_cast<std::size_t>(stride))
    out.points.push_back(t.points[i]);
  if (out.points.size() < 2)
    throw DataError("resample: tracklet " + std::to_string(t.id) +
                    " degenerates to fewer than 2 points");
  return out;
}

std::vector<Episode> split_windows(const Tracklet& t, int t1, int t2,
                                   int stride) {
  if (t1 < 1 || t2 < 1 || stride < 1)
    throw ConfigError("split_windows: t1, t2 and stride must be >= 1");
  std::vector<Episode> out;
  long long len = static_cast<long long>(t.points.size());
  for (long long s = 0; s + t1 + t2 <= len; s += stride) {
    Episode e;
    e.tracklet_id = t.id;
    e.t0 = t.start_frame + s;
    e.goal_exit = t.goal_exit;
    e.observed.assign(t.points.begin() + s, t.points.begin() + s + t1);
    e.future.assign(t.points.begin() + s + t1,
                    t.points.begin() + s + t1 + t2);
    out.push_back(std::move(e));
  }
  return out;
}

void assign_splits(std::vector<Episode>& episodes, double train_frac,
                   double val_frac, double test_frac) {
  if (train_frac <= 0 || val_frac <= 0 || test_frac <= 0)
    throw DataError("assign_splits: all fractions must be positive");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw DataError("assign_splits: fractions must sum to 1");

  std::vector<long long> order;
  std::unordered_map<long long, std::size_t> ordinal;
  for (const Episode& e : episodes) {
    if (!ordinal.count(e.tracklet_id)) {
      ordinal[e.tracklet_id] = order.size();
      order.push_back(e.tracklet_id);
    }
  }
  double n = static_cast<double>(order.size());
  if (order.size() < 3)
    throw DataError("assign_splits: need at least 3 tracklets");

  for (Episode& e : episodes) {
    double rank = static_cast<double>(ordinal[e.tracklet_id] + 1);
    if (rank <= n * train_frac + 1e-9)
      e.split = Split::Train;
    else if (rank <= n * (train_frac + val_frac) + 1e-9)
      e.split = Split::Val;
    else
      e.split = Split::Test;
  }
}

std::vector<Episode> episodes_with_split(const std::vector<Episode>& episodes,
                                         Split split) {
  std::vector<Episode> out;
  for (const Episode& e : episodes)
    if (e.split == split) out.push_back(e);
  return out;
}

}  // namespace crowdmimic
