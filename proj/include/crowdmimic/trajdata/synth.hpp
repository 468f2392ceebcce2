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

#include <cstdint>
#include <vector>

#include "crowdmimic/trajdata/scene.hpp"
#include "crowdmimic/trajdata/tracklet.hpp"

namespace crowdmimic {

/// Restricts synthetic agents to a spawn-exit/goal-exit pair. Agents are
/// assigned to flows by deterministic weighted round-robin, which makes the
/// stream composition of a run an exact function of the weights. A flow may
/// route through a via waypoint: agents head for (via_x, via_y) first and
/// switch to the goal once within via_radius, producing two-leg detour
/// paths that still terminate at the labeled goal exit.
struct FlowSpec {
  int spawn_exit = 0;
  int goal_exit = 0;
  double weight = 1.0;
  double via_x = 0, via_y = 0;
  double via_radius = 0;  // 0 disables the waypoint

  bool has_via() const { return via_radius > 0; }
};

struct SynthParams {
  double speed_min_px = 8.0;   // preferred speed per step, drawn once per agent
  double speed_max_px = 16.0;
  double spawn_gap_mean = 2.0;  // Poisson-distributed steps between spawns
  double deflect_deg = 15.0;    // reciprocal avoidance turn
  std::vector<FlowSpec> flows;  // empty: uniform exits, uniform distinct goal
};

/// Generates expert demonstrations: each agent spawns inside an exit region
/// at a seeded random time, walks toward its goal exit center at its
/// preferred speed and, when a constant-velocity extrapolation predicts a
/// pass closer than the collision threshold within one step, both members of
/// the conflicting pair rotate their preferred velocity so each passes on
/// its own right. Output is a pure function of the arguments.
std::vector<Tracklet> synth_generate(const SceneSpec& scene, int n_agents,
                                     int duration_steps, std::uint64_t seed,
                                     const SynthParams& params);

}  // namespace crowdmimic
