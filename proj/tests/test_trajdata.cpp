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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "crowdmimic/core/error.hpp"
#include "crowdmimic/core/rng.hpp"
#include "crowdmimic/trajdata/pipeline.hpp"
#include "crowdmimic/trajdata/synth.hpp"
#include "testutil.hpp"

using namespace crowdmimic;
using cmtest::tiny_scene;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

SceneSpec scene720() {
  SceneSpec s;
  s.width_px = 720;
  s.height_px = 480;
  s.collision_thresh_px = 5;
  s.vicinity_cells = 4;
  s.vicinity_extent_px = 32;
  s.exits.push_back({1, 0, 200, 20, 280});
  s.exits.push_back({2, 700, 200, 720, 280});
  s.validate();
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tracklet line_tracklet(long long id, int n, long long start = 0) {
  Tracklet t;
  t.id = id;
  t.start_frame = start;
  for (int i = 0; i < n; ++i)
    t.points.emplace_back(0.1 + 0.004 * i, 0.5);
  return t;
}

}  // namespace

TEST_CASE("load_tracklets: corners, clamping, grouping and errors") {
  SceneSpec scene = scene720();

  SUBCASE("corner maps to the unit corner, origin to zero") {
    std::string p = write_temp("cm_corner.csv",
                               "id,frame,x,y\n7,0,720,480\n7,1,0,0\n");
    auto ts = load_tracklets(p, scene);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].points[0] == Vec2d(1.0, 1.0));
    CHECK(ts[0].points[1] == Vec2d(0.0, 0.0));
  }
  SUBCASE("interleaved ids are grouped in file order") {
    std::string p = write_temp(
        "cm_interleave.csv",
        "id,frame,x,y\n2,0,10,10\n9,0,20,20\n2,1,11,10\n9,1,21,20\n2,2,12,10\n");
    auto ts = load_tracklets(p, scene);
    // Oracle: group rows by id by hand, preserving first-appearance order.
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].id == 2);
    CHECK(ts[1].id == 9);
    CHECK(ts[0].points.size() == 3);
    CHECK(ts[1].points.size() == 2);
    CHECK(ts[0].points[1].x() == doctest::Approx(11.0 / 720).epsilon(1e-12));
  }
  SUBCASE("2 px slack clamps, more is a parse error naming the line") {
    std::string ok = write_temp("cm_slack.csv",
                                "id,frame,x,y\n1,0,-1.5,100\n1,1,10,100\n");
    auto ts = load_tracklets(ok, scene);
    CHECK(ts[0].points[0].x() == 0.0);
    std::string bad = write_temp("cm_oob.csv",
                                 "id,frame,x,y\n1,0,-3,100\n1,1,10,100\n");
    try {
      load_tracklets(bad, scene);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("malformed row names the line") {
    std::string p = write_temp("cm_malformed.csv",
                               "id,frame,x,y\n1,0,5,5\n1,zap,6,5\n");
    try {
      load_tracklets(p, scene);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("empty file is an empty-dataset error") {
    std::string p = write_temp("cm_empty.csv", "id,frame,x,y\n");
    CHECK_THROWS_AS(load_tracklets(p, scene), DataError);
    CHECK_THROWS_AS(load_tracklets("/nonexistent/nope.csv", scene), IoError);
  }
  SUBCASE("non-ascending frames rejected") {
    std::string p = write_temp("cm_frames.csv",
                               "id,frame,x,y\n1,5,5,5\n1,5,6,6\n");
    CHECK_THROWS_AS(load_tracklets(p, scene), ParseError);
  }
}

TEST_CASE("normalization round-trip within 1e-9") {
  SceneSpec scene = scene720();
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    Vec2d px(rng.uniform(0, 720), rng.uniform(0, 480));
    Vec2d back = scene.to_px(scene.to_norm(px));
    CHECK((back - px).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("resample: stride enumeration oracle, identity and degeneracy") {
  Tracklet t = line_tracklet(1, 50, 120);

  SUBCASE("25 fps to 2 fps keeps every 12th point") {
    Tracklet r = resample(t, 25, 2);
    // Oracle: enumerate kept indices directly.
    std::vector<int> kept;
    for (int i = 0; i < 50; i += 12) kept.push_back(i);
    REQUIRE(r.points.size() == kept.size());
    CHECK(kept.size() == 5);
    for (std::size_t i = 0; i < kept.size(); ++i)
      CHECK(r.points[i] == t.points[static_cast<std::size_t>(kept[i])]);
    CHECK(r.start_frame == 10);  // 120 / 12
  }
  SUBCASE("equal rates keep the sequence") {
    Tracklet r = resample(t, 2, 2);
    CHECK(r.points == t.points);
    CHECK(r.start_frame == t.start_frame);
  }
  SUBCASE("too-short result is a degenerate-tracklet error") {
    Tracklet s = line_tracklet(2, 3);
    CHECK_THROWS_AS(resample(s, 24, 2), DataError);
  }
  SUBCASE("rate preconditions") {
    CHECK_THROWS_AS(resample(t, 2, 25), ConfigError);
  }
}

TEST_CASE("split_windows: counts and contiguity") {
  SUBCASE("17 points give exactly one episode") {
    auto eps = split_windows(line_tracklet(1, 17), 9, 8, 17);
    REQUIRE(eps.size() == 1);
    CHECK(eps[0].observed.size() == 9);
    CHECK(eps[0].future.size() == 8);
    CHECK(eps[0].observed[8] == line_tracklet(1, 17).points[8]);
    CHECK(eps[0].future[0] == line_tracklet(1, 17).points[9]);
  }
  SUBCASE("16 points give none") {
    CHECK(split_windows(line_tracklet(1, 16), 9, 8, 17).empty());
  }
  SUBCASE("34 points, stride 17, give two non-overlapping episodes") {
    auto eps = split_windows(line_tracklet(1, 34), 9, 8, 17);
    REQUIRE(eps.size() == 2);
    CHECK(eps[1].t0 - eps[0].t0 == 17);
  }
  SUBCASE("window count formula matches enumeration") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      int len = 2 + static_cast<int>(rng.uniform_int(199));
      int stride = 1 + static_cast<int>(rng.uniform_int(30));
      auto eps = split_windows(line_tracklet(1, len), 9, 8, stride);
      // Oracle: explicit enumeration of valid starts.
      long long expected = 0;
      for (long long s = 0; s + 17 <= len; s += stride) ++expected;
      long long formula =
          len >= 17 ? (static_cast<long long>(len) - 17) / stride + 1 : 0;
      CHECK(static_cast<long long>(eps.size()) == expected);
      CHECK(expected == formula);
    }
  }
}

TEST_CASE("assign_splits: by-tracklet cuts") {
  auto make_eps = [](int n_tracklets, int eps_each) {
    std::vector<Episode> eps;
    for (int t = 1; t <= n_tracklets; ++t)
      for (int k = 0; k < eps_each; ++k) {
        Episode e;
        e.tracklet_id = t;
        eps.push_back(e);
      }
    return eps;
  };

  SUBCASE("10 tracklets -> 8/1/1") {
    auto eps = make_eps(10, 2);
    assign_splits(eps, 0.8, 0.1, 0.1);
    for (std::size_t i = 0; i < eps.size(); ++i) {
      Split want = eps[i].tracklet_id <= 8   ? Split::Train
                   : eps[i].tracklet_id == 9 ? Split::Val
                                             : Split::Test;
      CHECK(eps[i].split == want);
    }
  }
  SUBCASE("zero fraction rejected") {
    auto eps = make_eps(10, 1);
    CHECK_THROWS_AS(assign_splits(eps, 1.0, 0.0, 0.0), DataError);
  }
  SUBCASE("100 tracklets -> 80/10/10 by count") {
    auto eps = make_eps(100, 1);
    assign_splits(eps, 0.8, 0.1, 0.1);
    // Oracle: cumulative count per split.
    int train = 0, val = 0, test = 0;
    for (const Episode& e : eps) {
      if (e.split == Split::Train) ++train;
      if (e.split == Split::Val) ++val;
      if (e.split == Split::Test) ++test;
    }
    CHECK(train == 80);
    CHECK(val == 10);
    CHECK(test == 10);
  }
  SUBCASE("fewer than 3 tracklets rejected") {
    auto eps = make_eps(2, 3);
    CHECK_THROWS_AS(assign_splits(eps, 0.8, 0.1, 0.1), DataError);
  }
}

TEST_CASE("synth_generate: straight single agent, avoidance, determinism") {
  SceneSpec scene = scene720();
  SynthParams params;

  SUBCASE("single agent walks straight to its goal") {
    auto ts = synth_generate(scene, 1, 200, 42, params);
    REQUIRE(ts.size() == 1);
    const Tracklet& t = ts[0];
    CHECK(t.goal_exit != 0);
    REQUIRE(t.points.size() >= 3);
    // Collinearity of every segment with the first.
    Vec2d dir = t.points[1] - t.points[0];
    for (std::size_t i = 2; i < t.points.size(); ++i) {
      Vec2d seg = t.points[i] - t.points[i - 1];
      CHECK(std::abs(dir.x() * seg.y() - dir.y() * seg.x()) < 1e-9);
    }
    for (const Vec2d& p : t.points) {
      CHECK(p.x() >= 0.0);
      CHECK(p.x() <= 1.0);
      CHECK(p.y() >= 0.0);
      CHECK(p.y() <= 1.0);
    }
  }

  SUBCASE("head-on pair never gets closer than the collision threshold") {
    SceneSpec narrow = scene720();
    narrow.exits.clear();
    narrow.exits.push_back({1, 0, 235, 10, 245});
    narrow.exits.push_back({2, 710, 235, 720, 245});
    SynthParams p2;
    p2.flows.push_back({1, 2, 1.0});
    p2.flows.push_back({2, 1, 1.0});
    auto ts = synth_generate(narrow, 2, 200, 7, p2);
    REQUIRE(ts.size() == 2);
    // Oracle: replay both tracklets on the common clock and check all
    // pairwise distances.
    double min_d = 1e18;
    long long lo = std::max(ts[0].start_frame, ts[1].start_frame);
    long long hi = std::min(
        ts[0].start_frame + static_cast<long long>(ts[0].points.size()),
        ts[1].start_frame + static_cast<long long>(ts[1].points.size()));
    REQUIRE(lo < hi);
    for (long long f = lo; f < hi; ++f) {
      Vec2d a = narrow.to_px(
          ts[0].points[static_cast<std::size_t>(f - ts[0].start_frame)]);
      Vec2d b = narrow.to_px(
          ts[1].points[static_cast<std::size_t>(f - ts[1].start_frame)]);
      min_d = std::min(min_d, (a - b).norm());
    }
    CHECK(min_d >= narrow.collision_thresh_px);
  }

  SUBCASE("same seed twice is byte-identical on export") {
    auto a = synth_generate(scene, 6, 120, 9, params);
    auto b = synth_generate(scene, 6, 120, 9, params);
    std::string pa =
        (std::filesystem::temp_directory_path() / "cm_synth_a.csv").string();
    std::string pb =
        (std::filesystem::temp_directory_path() / "cm_synth_b.csv").string();
    save_tracklets_csv(pa, a, scene);
    save_tracklets_csv(pb, b, scene);
    CHECK(read_file(pa) == read_file(pb));
    CHECK(read_file(pa).find("goal_exit") != std::string::npos);
  }

  SUBCASE("export and reload round-trips through the CSV schema") {
    auto ts = synth_generate(scene, 4, 120, 11, params);
    std::string p =
        (std::filesystem::temp_directory_path() / "cm_synth_rt.csv").string();
    save_tracklets_csv(p, ts, scene);
    auto back = load_tracklets(p, scene);
    REQUIRE(back.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      CHECK(back[i].goal_exit == ts[i].goal_exit);
      REQUIRE(back[i].points.size() == ts[i].points.size());
      for (std::size_t k = 0; k < ts[i].points.size(); ++k)
        CHECK((back[i].points[k] - ts[i].points[k]).cwiseAbs().maxCoeff() <
              1e-6);
    }
  }
}

TEST_CASE("make_frame_batches: grouping, neighbors and symmetry") {
  SceneSpec scene = tiny_scene();
  auto episode_at = [](long long t0, double y) {
    return cmtest::straight_episode(y, 3, 2, t0);
  };

  SUBCASE("disjoint windows form singleton batches") {
    std::vector<Episode> eps{episode_at(0, 0.4), episode_at(100, 0.6)};
    auto batches = make_frame_batches(eps, scene, 8);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].size() == 1);
    // Singleton: no co-present neighbors at any step.
    for (const auto& per_t : batches[0].neighbor_index[0])
      CHECK(per_t.empty());
  }
  SUBCASE("three overlapping episodes with cap 2 split 2+1") {
    std::vector<Episode> eps{episode_at(0, 0.4), episode_at(1, 0.5),
                             episode_at(2, 0.6)};
    auto batches = make_frame_batches(eps, scene, 2);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].size() == 2);
    CHECK(batches[1].size() == 1);
  }
  SUBCASE("neighbor symmetry on randomized batches") {
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<Episode> eps;
      int n = 2 + static_cast<int>(rng.uniform_int(6));
      for (int i = 0; i < n; ++i)
        eps.push_back(episode_at(rng.uniform_int(8), 0.3 + 0.05 * i));
      auto batches = make_frame_batches(eps, scene, 8);
      for (const FrameBatch& b : batches) {
        for (int i = 0; i < b.size(); ++i)
          for (int t = 0; t < b.window_len(); ++t)
            for (const NeighborRef& nb : b.neighbor_index[i][t]) {
              // The mirrored entry must exist at the same absolute time.
              long long tau = b.episodes[i].t0 + t;
              long long tj = tau - b.episodes[nb.other].t0;
              REQUIRE(tj >= 0);
              REQUIRE(tj < b.window_len());
              bool found = false;
              for (const NeighborRef& back :
                   b.neighbor_index[nb.other][static_cast<std::size_t>(tj)])
                if (back.other == i) {
                  found = true;
                  CHECK((back.offset_px + nb.offset_px).norm() < 1e-9);
                }
              CHECK(found);
            }
      }
    }
  }
}

TEST_CASE("build_dataset assembles splits and batches") {
  SceneSpec scene = scene720();
  auto ts = synth_generate(scene, 40, 400, 3, SynthParams{});
  REQUIRE(ts.size() >= 30);
  DataPipelineOptions opts;
  opts.t1 = 9;
  opts.t2 = 8;
  opts.stride = 17;
  Dataset data = build_dataset(ts, scene, opts);
  CHECK(!data.train.empty());
  long long n = 0;
  for (const auto& b : data.train) n += b.size();
  for (const auto& b : data.val) n += b.size();
  for (const auto& b : data.test) n += b.size();
  CHECK(n == static_cast<long long>(data.episodes.size()));
  for (const Episode& e : data.episodes) {
    CHECK(e.observed.size() == 9);
    CHECK(e.future.size() == 8);
  }
}
