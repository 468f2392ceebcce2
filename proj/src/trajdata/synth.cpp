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

#include "crowdmimic/trajdata/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdmimic/core/error.hpp"
#include "crowdmimic/core/rng.hpp"

namespace crowdmimic {
namespace {

struct Agent {
  long long spawn_step = 0;
  Vec2d pos{0, 0};
  int goal_exit = 0;
  double speed = 0;
  bool skipped = false;
  bool done = false;
  Vec2d via{0, 0};
  double via_radius = 0;  // 0: no pending waypoint
  std::vector<Vec2d> points_px;
};

Vec2d rotate(const Vec2d& v, double rad) {
  double c = std::cos(rad), s = std::sin(rad);
  return Vec2d(v.x() * c - v.y() * s, v.x() * s + v.y() * c);
}

/// Minimum distance between two constant-velocity extrapolations over one
/// step (tau in [0,1]).
double min_pass_distance(const Vec2d& p0, const Vec2d& v0, const Vec2d& p1,
                         const Vec2d& v1) {
  Vec2d dp = p0 - p1;
  Vec2d dv = v0 - v1;
  double dv2 = dv.squaredNorm();
  double tau = dv2 > 0 ? std::clamp(-dp.dot(dv) / dv2, 0.0, 1.0) : 0.0;
  return (dp + tau * dv).norm();
}

Vec2d uniform_point_in(const ExitRegion& e, Rng& rng) {
  return Vec2d(rng.uniform(e.x0, e.x1), rng.uniform(e.y0, e.y1));
}

}  // namespace

std::vector<Tracklet> synth_generate(const SceneSpec& scene, int n_agents,
                                     int duration_steps, std::uint64_t seed,
                                     const SynthParams& params) {
  scene.validate();
  if (n_agents < 1) throw ConfigError("synth: n_agents must be >= 1");
  if (scene.exits.size() < 2)
    throw ConfigError("synth: scene needs at least 2 exits");
  for (const FlowSpec& f : params.flows) {
    scene.exit_by_id(f.spawn_exit);
    scene.exit_by_id(f.goal_exit);
    if (f.spawn_exit == f.goal_exit)
      throw ConfigError("synth: flow spawn and goal exits must differ");
    if (f.weight <= 0) throw ConfigError("synth: flow weight must be positive");
  }

  Rng rng(seed);
  std::vector<Agent> agents(static_cast<std::size_t>(n_agents));

  // Weighted round-robin flow assignment (deterministic stream composition).
  std::vector<double> flow_acc(params.flows.size(), 0.0);
  double flow_total = 0;
  for (const FlowSpec& f : params.flows) flow_total += f.weight;

  long long next_spawn = 0;
  for (int a = 0; a < n_agents; ++a) {
    Agent& ag = agents[static_cast<std::size_t>(a)];
    ag.spawn_step = next_spawn;
    next_spawn += rng.poisson(params.spawn_gap_mean);
    ag.speed = rng.uniform(params.speed_min_px, params.speed_max_px);

    int spawn_exit;
    if (params.flows.empty()) {
      spawn_exit =
          scene.exits[static_cast<std::size_t>(
                          rng.uniform_int(static_cast<std::int64_t>(
                              scene.exits.size())))]
              .id;
    } else {
      std::size_t pick = 0;
      for (std::size_t f = 0; f < params.flows.size(); ++f) {
        flow_acc[f] += params.flows[f].weight;
        if (flow_acc[f] > flow_acc[pick]) pick = f;
      }
      flow_acc[pick] -= flow_total;
      const FlowSpec& flow = params.flows[pick];
      spawn_exit = flow.spawn_exit;
      ag.goal_exit = flow.goal_exit;
      if (flow.has_via()) {
        ag.via = Vec2d(flow.via_x, flow.via_y);
        ag.via_radius = flow.via_radius;
      }
    }

    // Spawn point must not already sit inside the goal region; retry a few
    // times, then skip the agent.
    bool placed = false;
    for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
      ag.pos = uniform_point_in(scene.exit_by_id(spawn_exit), rng);
      if (params.flows.empty()) {
        std::int64_t k = rng.uniform_int(
            static_cast<std::int64_t>(scene.exits.size()) - 1);
        for (const ExitRegion& e : scene.exits) {
          if (e.id == spawn_exit) continue;
          if (k == 0) {
            ag.goal_exit = e.id;
            break;
          }
          --k;
        }
      }
      placed = !scene.exit_by_id(ag.goal_exit).contains(ag.pos);
    }
    if (!placed) {
      ag.skipped = true;
      continue;
    }
    ag.points_px.push_back(ag.pos);
  }

  double deflect_rad = params.deflect_deg * M_PI / 180.0;
  std::vector<int> live;
  std::vector<Vec2d> vel(static_cast<std::size_t>(n_agents));
  for (long long step = 0; step < duration_steps; ++step) {
    live.clear();
    for (int a = 0; a < n_agents; ++a) {
      const Agent& ag = agents[static_cast<std::size_t>(a)];
      if (!ag.skipped && !ag.done && ag.spawn_step <= step) live.push_back(a);
    }
    if (live.empty()) continue;

    for (int a : live) {
      Agent& ag = agents[static_cast<std::size_t>(a)];
      if (ag.via_radius > 0 && (ag.via - ag.pos).norm() <= ag.via_radius)
        ag.via_radius = 0;  // waypoint reached, head for the goal
      Vec2d target = ag.via_radius > 0
                         ? ag.via
                         : scene.exit_by_id(ag.goal_exit).center();
      Vec2d to_goal = target - ag.pos;
      double dist = to_goal.norm();
      vel[static_cast<std::size_t>(a)] =
          dist <= ag.speed || dist == 0 ? to_goal
                                        : Vec2d(to_goal * (ag.speed / dist));
    }

    // Pairwise conflict check on the un-deflected preferred velocities; both
    // members of a conflicting pair turn, each passing on its own right.
    std::vector<int> conflict_with(static_cast<std::size_t>(n_agents), -1);
    std::vector<double> conflict_dist(static_cast<std::size_t>(n_agents),
                                      std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        int a = live[i], b = live[j];
        double d = min_pass_distance(
            agents[static_cast<std::size_t>(a)].pos,
            vel[static_cast<std::size_t>(a)],
            agents[static_cast<std::size_t>(b)].pos,
            vel[static_cast<std::size_t>(b)]);
        if (d < scene.collision_thresh_px) {
          if (d < conflict_dist[static_cast<std::size_t>(a)]) {
            conflict_dist[static_cast<std::size_t>(a)] = d;
            conflict_with[static_cast<std::size_t>(a)] = b;
          }
          if (d < conflict_dist[static_cast<std::size_t>(b)]) {
            conflict_dist[static_cast<std::size_t>(b)] = d;
            conflict_with[static_cast<std::size_t>(b)] = a;
          }
        }
      }
    }
    for (int a : live) {
      int other = conflict_with[static_cast<std::size_t>(a)];
      if (other < 0) continue;
      Vec2d d = agents[static_cast<std::size_t>(other)].pos -
                agents[static_cast<std::size_t>(a)].pos;
      const Vec2d& v = vel[static_cast<std::size_t>(a)];
      double cross = v.x() * d.y() - v.y() * d.x();
      double sign = cross > 0 ? -1.0 : 1.0;
      vel[static_cast<std::size_t>(a)] = rotate(v, sign * deflect_rad);
    }

    for (int a : live) {
      Agent& ag = agents[static_cast<std::size_t>(a)];
      ag.pos += vel[static_cast<std::size_t>(a)];
      ag.pos.x() = std::clamp(ag.pos.x(), 0.0, double(scene.width_px));
      ag.pos.y() = std::clamp(ag.pos.y(), 0.0, double(scene.height_px));
      ag.points_px.push_back(ag.pos);
      if (scene.exit_by_id(ag.goal_exit).contains(ag.pos)) ag.done = true;
    }
  }

  std::vector<Tracklet> out;
  long long next_id = 1;
  for (const Agent& ag : agents) {
    if (ag.skipped || ag.points_px.size() < 2) continue;
    Tracklet t;
    t.id = next_id++;
    t.start_frame = ag.spawn_step;
    t.goal_exit = ag.goal_exit;
    t.points.reserve(ag.points_px.size());
    for (const Vec2d& p : ag.points_px) t.points.push_back(scene.to_norm(p));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace crowdmimic
