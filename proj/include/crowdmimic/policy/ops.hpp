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

#include <cmath>
#include <vector>

#include "crowdmimic/policy/policy_net.hpp"
#include "crowdmimic/trajdata/scene.hpp"

namespace crowdmimic {

template <class Scalar>
struct RecurrentState {
  VecX<Scalar> h, c;
};

/// Runs the encoder over the observed window from the zero state and returns
/// the final recurrent state (its `h` is the fixed-length descriptor).
template <class Scalar>
RecurrentState<Scalar> encode(const PolicyNet<Scalar>& net,
                              const std::vector<Vec2d>& observed) {
  MatX<Scalar> h = MatX<Scalar>::Zero(net.hidden, 1);
  MatX<Scalar> c = MatX<Scalar>::Zero(net.hidden, 1);
  MatX<Scalar> x(2, 1);
  for (const Vec2d& p : observed) {
    if (!p.allFinite()) throw NumericError("encode: non-finite input point");
    x(0, 0) = Scalar(p.x());
    x(1, 0) = Scalar(p.y());
    MatX<Scalar> hn, cn;
    lstm_forward(net.enc, x, h, c, hn, cn, (LstmStepCache<Scalar>*)nullptr);
    h = std::move(hn);
    c = std::move(cn);
  }
  return {h.col(0), c.col(0)};
}

/// Adds the embedded one-hot code to a fully-connected activation.
template <class Scalar>
VecX<Scalar> inject_code(const PolicyNet<Scalar>& net, const LatentCode& code,
                         const VecX<Scalar>& fc_activation) {
  if (net.code_dim == 0 || code.dim != net.code_dim)
    throw ConfigError("inject_code: code dimension does not match the policy");
  if (fc_activation.size() != net.fc_width)
    throw ConfigError("inject_code: activation width mismatch");
  return fc_activation + net.code_embed.W.col(code.index) + net.code_embed.b;
}

/// Flat-layout index of a vicinity cell: cells are row-major over (cy, cx)
/// and each cell holds one H-wide slice.
inline int vicinity_cell_index(int cx, int cy, int cells) {
  return cy * cells + cx;
}

/// Cell coordinates of a neighbor offset (pixels, neighbor minus center).
/// Cells are half-open: an offset of exactly +extent/2 falls outside.
/// Returns false when the neighbor is not inside the square.
inline bool vicinity_cell_of(const Vec2d& offset_px, int cells,
                             double extent_px, int& cx, int& cy) {
  double cell = extent_px / cells;
  cx = static_cast<int>(std::floor((offset_px.x() + extent_px / 2) / cell));
  cy = static_cast<int>(std::floor((offset_px.y() + extent_px / 2) / cell));
  return cx >= 0 && cx < cells && cy >= 0 && cy < cells;
}

/// Builds the flattened N*N*H vicinity tensor for agent `i`: every other
/// agent inside the square of side `vicinity_extent_px` centered on `i`
/// contributes its hidden state to its cell's slice; cells sum.
template <class Scalar>
VecX<Scalar> vicinity_tensor(int i, const std::vector<Vec2d>& positions_px,
                             const std::vector<VecX<Scalar>>& hiddens,
                             const SceneSpec& scene) {
  const int n = scene.vicinity_cells;
  const int h = hiddens.empty() ? 0 : static_cast<int>(hiddens.front().size());
  VecX<Scalar> vt = VecX<Scalar>::Zero(n * n * h);
  for (std::size_t j = 0; j < positions_px.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    int cx, cy;
    if (!vicinity_cell_of(positions_px[j] - positions_px[static_cast<std::size_t>(i)],
                          n, scene.vicinity_extent_px, cx, cy))
      continue;
    vt.segment(vicinity_cell_index(cx, cy, n) * h, h) += hiddens[j];
  }
  return vt;
}

/// One decoder step: advances the recurrent state on the previous action,
/// adds the vicinity embedding to the new hidden state when a tensor is
/// supplied, and maps hidden -> fc (ReLU) -> optional code injection -> mean.
template <class Scalar>
std::pair<Vec2<Scalar>, RecurrentState<Scalar>> decode_step(
    const PolicyNet<Scalar>& net, const Vec2d& prev_action,
    const RecurrentState<Scalar>& state, const LatentCode* code,
    const VecX<Scalar>* vt) {
  MatX<Scalar> x(2, 1);
  x(0, 0) = Scalar(prev_action.x());
  x(1, 0) = Scalar(prev_action.y());
  MatX<Scalar> hprev = state.h;
  MatX<Scalar> cprev = state.c;
  MatX<Scalar> hn, cn;
  lstm_forward(net.dec, x, hprev, cprev, hn, cn,
               (LstmStepCache<Scalar>*)nullptr);
  RecurrentState<Scalar> out{hn.col(0), cn.col(0)};
  if (vt) {
    if (vt->size() != net.vicinity_flat_size())
      throw ConfigError("decode_step: vicinity tensor size mismatch");
    out.h += net.vic_embed.W * (*vt) + net.vic_embed.b;
  }
  VecX<Scalar> act =
      (net.fc_hidden.W * out.h + net.fc_hidden.b).cwiseMax(Scalar(0));
  if (code) act = inject_code(net, *code, act);
  VecX<Scalar> mean = net.fc_out.W * act + net.fc_out.b;
  return {Vec2<Scalar>(mean(0), mean(1)), std::move(out)};
}

/// Log-density of a diagonal Gaussian with fixed log standard deviations.
template <class Scalar>
Scalar gaussian_log_prob(const Vec2<Scalar>& action, const Vec2<Scalar>& mean,
                         const Vec2<Scalar>& log_std) {
  Scalar lp = 0;
  for (int d = 0; d < 2; ++d) {
    Scalar sigma = std::exp(log_std(d));
    Scalar z = (action(d) - mean(d)) / sigma;
    lp += -Scalar(0.5) * z * z - log_std(d) -
          Scalar(0.5) * std::log(Scalar(2) * Scalar(M_PI));
  }
  return lp;
}

/// Draws an action from the diagonal Gaussian. Deterministic callers pass
/// rng = nullptr and receive the mean with its own log-density.
template <class Scalar>
std::pair<Vec2<Scalar>, Scalar> sample_action(const Vec2<Scalar>& mean,
                                              const Vec2<Scalar>& log_std,
                                              Rng* rng) {
  Vec2<Scalar> a = mean;
  if (rng) {
    for (int d = 0; d < 2; ++d)
      a(d) += std::exp(log_std(d)) * Scalar(rng->normal());
  }
  return {a, gaussian_log_prob(a, mean, log_std)};
}

/// Collision gate over one lockstep step, in pixels. Every unordered pair of
/// candidates strictly closer than `thresh_px` is held: both agents are put
/// back at their previous position and flagged. Flags are decided on the
/// original candidates in a single pass.
inline void collision_gate(const std::vector<Vec2d>& candidates_px,
                           const std::vector<Vec2d>& previous_px,
                           double thresh_px, std::vector<Vec2d>& gated_px,
                           std::vector<uint8_t>& hit) {
  const std::size_t n = candidates_px.size();
  hit.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((candidates_px[i] - candidates_px[j]).norm() < thresh_px) {
        hit[i] = 1;
        hit[j] = 1;
      }
  gated_px.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    gated_px[i] = hit[i] ? previous_px[i] : candidates_px[i];
}

}  // namespace crowdmimic
