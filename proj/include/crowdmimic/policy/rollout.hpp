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

#include <algorithm>
#include <utility>
#include <vector>

#include "crowdmimic/policy/ops.hpp"
#include "crowdmimic/policy/policy_net.hpp"
#include "crowdmimic/trajdata/frame_batch.hpp"

namespace crowdmimic {

struct RolloutOptions {
  bool stochastic = false;
  bool gate = true;
  bool vicinity = true;
};

/// One generated future per episode. `actions` are the executed (post-gate)
/// positions; `log_probs` are recorded on the pre-gate sampled action.
struct RolloutResult {
  int episode = 0;
  int code = -1;
  std::vector<Vec2d> actions;
  std::vector<Vec2d> means;
  std::vector<double> log_probs;
  std::vector<uint8_t> gate_hits;
};

struct VicEntry {
  int neighbor = 0;  // batch agent index
  int cell = 0;      // flat cell index
};

/// Recorded decode step on the batch's shared clock. Fields up to `OldLogp`
/// are data fixed at rollout time; the trailing fields are caches that a
/// replay pass recomputes for the current parameters.
template <class Scalar>
struct DecStepTape {
  long long tau = 0;
  std::vector<int> active;      // batch agent indices decoding at tau
  std::vector<int> step_index;  // per active agent: decode step 0..t2-1
  MatX<Scalar> X;               // 2 x A inputs (previous executed positions)
  std::vector<std::vector<VicEntry>> vic;  // per active-local agent
  MatX<Scalar> Sampled;         // 2 x A pre-gate actions
  std::vector<uint8_t> gate_hit;
  MatX<Scalar> Exec;            // 2 x A executed positions
  MatX<Scalar> OldMean;         // 2 x A means at rollout time
  VecX<Scalar> OldLogp;         // A

  LstmStepCache<Scalar> cell;
  MatX<Scalar> VicFlat;  // (N*N*H) x A
  MatX<Scalar> Hpost;    // H x A, carried state after the vicinity add
  MatX<Scalar> FcPre;    // F x A pre-ReLU
  MatX<Scalar> FcIn;     // F x A input to fc_out (post-ReLU, post-code)
  MatX<Scalar> Mean;     // 2 x A
};

template <class Scalar>
struct EncStepTape {
  MatX<Scalar> X;  // 2 x B
  LstmStepCache<Scalar> cell;
};

/// Full record of one lockstep pass over a FrameBatch: enough data to replay
/// the computation teacher-forced under new parameters and to backpropagate
/// exactly, including through the vicinity coupling across agents.
template <class Scalar>
struct BatchTape {
  int t1 = 0, t2 = 0, batch = 0;
  bool stochastic = false, gate = false, vicinity = false, has_codes = false;
  std::vector<int> codes;            // per agent, -1 when absent
  MatX<Scalar> CodeOnehot;           // K x B when has_codes
  std::vector<long long> dec_start;  // absolute first decode step per agent

  std::vector<EncStepTape<Scalar>> enc;
  MatX<Scalar> EncH, EncC;  // H x B final encoder states
  std::vector<DecStepTape<Scalar>> dec;

  /// Per agent: (dec step index s, active-local column) for k = 0..t2-1.
  std::vector<std::vector<std::pair<int, int>>> agent_steps;

  /// Whitened episodic advantage per agent (set by the trainer).
  VecX<Scalar> advantage;

  long long total_steps() const {
    return static_cast<long long>(batch) * t2;
  }
};

namespace detail {

template <class Scalar>
MatX<Scalar> gather_cols(const MatX<Scalar>& m, const std::vector<int>& idx) {
  MatX<Scalar> out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out.col(a) = m.col(idx[a]);
  return out;
}

template <class Scalar>
void scatter_cols(MatX<Scalar>& m, const std::vector<int>& idx,
                  const MatX<Scalar>& cols) {
  for (std::size_t a = 0; a < idx.size(); ++a) m.col(idx[a]) = cols.col(a);
}

/// Recomputes everything parameter-dependent for one decode step, given the
/// recorded inputs and the running pre-step states. Used identically by the
/// rollout and the replay pass so both produce bit-equal means.
template <class Scalar>
void compute_dec_step(const PolicyNet<Scalar>& net, const BatchTape<Scalar>& tape,
                      DecStepTape<Scalar>& step, const MatX<Scalar>& Hcur,
                      const MatX<Scalar>& Ccur, MatX<Scalar>& Hout,
                      MatX<Scalar>& Cout) {
  const int h = net.hidden;
  const auto a = static_cast<Eigen::Index>(step.active.size());

  MatX<Scalar> Hprev = gather_cols(Hcur, step.active);
  MatX<Scalar> Cprev = gather_cols(Ccur, step.active);
  MatX<Scalar> Hcell, Cpost;
  lstm_forward(net.dec, step.X, Hprev, Cprev, Hcell, Cpost, &step.cell);

  if (tape.vicinity) {
    step.VicFlat = MatX<Scalar>::Zero(net.vicinity_flat_size(), a);
    for (Eigen::Index col = 0; col < a; ++col)
      for (const VicEntry& e : step.vic[static_cast<std::size_t>(col)])
        step.VicFlat.block(e.cell * h, col, h, 1) += Hcur.col(e.neighbor);
    step.Hpost = Hcell + ((net.vic_embed.W * step.VicFlat).colwise() +
                          net.vic_embed.b);
  } else {
    step.Hpost = std::move(Hcell);
  }

  step.FcPre = (net.fc_hidden.W * step.Hpost).colwise() + net.fc_hidden.b;
  step.FcIn = relu(step.FcPre);
  if (tape.has_codes) {
    MatX<Scalar> codes = gather_cols(tape.CodeOnehot, step.active);
    step.FcIn += (net.code_embed.W * codes).colwise() + net.code_embed.b;
  }
  step.Mean = (net.fc_out.W * step.FcIn).colwise() + net.fc_out.b;

  Hout = step.Hpost;
  Cout = std::move(Cpost);
}

template <class Scalar>
void run_encoder(const PolicyNet<Scalar>& net, BatchTape<Scalar>& tape) {
  const int b = tape.batch;
  MatX<Scalar> H = MatX<Scalar>::Zero(net.hidden, b);
  MatX<Scalar> C = MatX<Scalar>::Zero(net.hidden, b);
  for (EncStepTape<Scalar>& s : tape.enc) {
    MatX<Scalar> Hn, Cn;
    lstm_forward(net.enc, s.X, H, C, Hn, Cn, &s.cell);
    H = std::move(Hn);
    C = std::move(Cn);
  }
  tape.EncH = std::move(H);
  tape.EncC = std::move(C);
}

}  // namespace detail

/// Generates futures for every episode of a FrameBatch. All episodes advance
/// in lockstep on the batch's shared clock; at each step the agents
/// currently decoding exchange vicinity context and pass through the
/// collision gate together, and each executed (post-gate) position is fed
/// back as the next decoder input. The latent code, when given, is fixed for
/// the whole rollout of an episode.
template <class Scalar>
std::vector<RolloutResult> rollout_batch(
    const PolicyNet<Scalar>& net, const FrameBatch& batch,
    const SceneSpec& scene, const std::vector<int>& codes,
    const RolloutOptions& opts, Rng* rng, BatchTape<Scalar>* tape_out) {
  const int b = batch.size();
  const int t1 = batch.t1;
  const int t2 = batch.t2;
  if (!codes.empty() && static_cast<int>(codes.size()) != b)
    throw ConfigError("rollout: one code per episode required");
  if (!codes.empty() && net.code_dim == 0)
    throw ConfigError("rollout: codes supplied to a code-free policy");
  if (opts.stochastic && !rng)
    throw ConfigError("rollout: stochastic mode needs an rng stream");
  if (opts.vicinity && net.vicinity_cells != scene.vicinity_cells)
    throw ConfigError("rollout: policy vicinity grid (" +
                      std::to_string(net.vicinity_cells) +
                      ") does not match the scene (" +
                      std::to_string(scene.vicinity_cells) + ")");

  BatchTape<Scalar> local;
  BatchTape<Scalar>& tape = tape_out ? *tape_out : local;
  tape = BatchTape<Scalar>();
  tape.t1 = t1;
  tape.t2 = t2;
  tape.batch = b;
  tape.stochastic = opts.stochastic;
  tape.gate = opts.gate;
  tape.vicinity = opts.vicinity;
  tape.has_codes = !codes.empty();
  tape.codes.assign(static_cast<std::size_t>(b), -1);
  if (tape.has_codes) {
    tape.CodeOnehot = MatX<Scalar>::Zero(net.code_dim, b);
    for (int i = 0; i < b; ++i) {
      if (codes[static_cast<std::size_t>(i)] < 0 ||
          codes[static_cast<std::size_t>(i)] >= net.code_dim)
        throw ConfigError("rollout: code index out of range");
      tape.codes[static_cast<std::size_t>(i)] = codes[static_cast<std::size_t>(i)];
      tape.CodeOnehot(codes[static_cast<std::size_t>(i)], i) = Scalar(1);
    }
  }

  // Encoder phase: all agents advance over their own observed windows.
  tape.enc.resize(static_cast<std::size_t>(t1));
  for (int t = 0; t < t1; ++t) {
    MatX<Scalar>& X = tape.enc[static_cast<std::size_t>(t)].X;
    X.resize(2, b);
    for (int i = 0; i < b; ++i) {
      const Vec2d& p = batch.episodes[static_cast<std::size_t>(i)]
                           .observed[static_cast<std::size_t>(t)];
      if (!p.allFinite()) throw NumericError("rollout: non-finite observation");
      X(0, i) = Scalar(p.x());
      X(1, i) = Scalar(p.y());
    }
  }
  detail::run_encoder(net, tape);

  tape.dec_start.resize(static_cast<std::size_t>(b));
  long long tau_min = 0, tau_max = 0;
  for (int i = 0; i < b; ++i) {
    long long start = batch.episodes[static_cast<std::size_t>(i)].t0 + t1;
    tape.dec_start[static_cast<std::size_t>(i)] = start;
    if (i == 0 || start < tau_min) tau_min = start;
    if (i == 0 || start + t2 > tau_max) tau_max = start + t2;
  }

  MatX<Scalar> Hcur = tape.EncH;
  MatX<Scalar> Ccur = tape.EncC;
  MatX<Scalar> Xcur(2, b);  // current position per agent, normalized
  for (int i = 0; i < b; ++i) {
    const Vec2d& last =
        batch.episodes[static_cast<std::size_t>(i)].observed.back();
    Xcur(0, i) = Scalar(last.x());
    Xcur(1, i) = Scalar(last.y());
  }

  tape.agent_steps.assign(static_cast<std::size_t>(b), {});
  const Vec2<Scalar> log_std = net.log_std;
  const Scalar wpx = Scalar(scene.width_px);
  const Scalar hpx = Scalar(scene.height_px);

  for (long long tau = tau_min; tau < tau_max; ++tau) {
    DecStepTape<Scalar> step;
    step.tau = tau;
    for (int i = 0; i < b; ++i) {
      long long k = tau - tape.dec_start[static_cast<std::size_t>(i)];
      if (k >= 0 && k < t2) {
        step.active.push_back(i);
        step.step_index.push_back(static_cast<int>(k));
      }
    }
    if (step.active.empty()) continue;
    const auto a = static_cast<Eigen::Index>(step.active.size());

    step.X = detail::gather_cols(Xcur, step.active);
    step.vic.assign(static_cast<std::size_t>(a), {});
    if (opts.vicinity) {
      for (Eigen::Index ca = 0; ca < a; ++ca) {
        int i = step.active[static_cast<std::size_t>(ca)];
        Vec2d pos_i(double(Xcur(0, i)) * double(wpx),
                    double(Xcur(1, i)) * double(hpx));
        for (int j : step.active) {
          if (j == i) continue;
          Vec2d pos_j(double(Xcur(0, j)) * double(wpx),
                      double(Xcur(1, j)) * double(hpx));
          int cx, cy;
          if (vicinity_cell_of(pos_j - pos_i, scene.vicinity_cells,
                               scene.vicinity_extent_px, cx, cy))
            step.vic[static_cast<std::size_t>(ca)].push_back(VicEntry{
                j, vicinity_cell_index(cx, cy, scene.vicinity_cells)});
        }
      }
    }

    MatX<Scalar> Hout, Cout;
    detail::compute_dec_step(net, tape, step, Hcur, Ccur, Hout, Cout);

    if (!step.Mean.allFinite()) {
      for (Eigen::Index ca = 0; ca < a; ++ca)
        if (!step.Mean.col(ca).allFinite())
          throw NumericError(
              "rollout diverged: non-finite mean at decode step " +
              std::to_string(step.step_index[static_cast<std::size_t>(ca)] + 1) +
              " of episode " +
              std::to_string(step.active[static_cast<std::size_t>(ca)]));
    }

    // Sample (or copy) actions one agent at a time in index order so the
    // stream of draws is independent of batching internals.
    step.Sampled = step.Mean;
    step.OldLogp.resize(a);
    if (opts.stochastic) {
      for (Eigen::Index ca = 0; ca < a; ++ca)
        for (int d = 0; d < 2; ++d)
          step.Sampled(d, ca) += std::exp(log_std(d)) * Scalar(rng->normal());
    }
    for (Eigen::Index ca = 0; ca < a; ++ca)
      step.OldLogp(ca) = gaussian_log_prob<Scalar>(
          step.Sampled.col(ca), step.Mean.col(ca), log_std);
    step.OldMean = step.Mean;

    // Collision gate in pixels across the currently decoding agents.
    step.gate_hit.assign(static_cast<std::size_t>(a), 0);
    step.Exec = step.Sampled;
    if (opts.gate) {
      std::vector<Vec2d> cand(static_cast<std::size_t>(a));
      std::vector<Vec2d> prev(static_cast<std::size_t>(a));
      for (Eigen::Index ca = 0; ca < a; ++ca) {
        cand[static_cast<std::size_t>(ca)] =
            Vec2d(double(step.Sampled(0, ca)) * double(wpx),
                  double(step.Sampled(1, ca)) * double(hpx));
        prev[static_cast<std::size_t>(ca)] =
            Vec2d(double(step.X(0, ca)) * double(wpx),
                  double(step.X(1, ca)) * double(hpx));
      }
      std::vector<Vec2d> gated;
      collision_gate(cand, prev, scene.collision_thresh_px, gated,
                     step.gate_hit);
      for (Eigen::Index ca = 0; ca < a; ++ca)
        if (step.gate_hit[static_cast<std::size_t>(ca)])
          step.Exec.col(ca) = step.X.col(ca);
    }

    // Feed back executed positions and carry states.
    for (Eigen::Index ca = 0; ca < a; ++ca) {
      int i = step.active[static_cast<std::size_t>(ca)];
      Xcur.col(i) = step.Exec.col(ca);
      tape.agent_steps[static_cast<std::size_t>(i)].emplace_back(
          static_cast<int>(tape.dec.size()), static_cast<int>(ca));
    }
    detail::scatter_cols(Hcur, step.active, Hout);
    detail::scatter_cols(Ccur, step.active, Cout);
    tape.dec.push_back(std::move(step));
  }

  // Extract per-episode results.
  std::vector<RolloutResult> results(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    RolloutResult& r = results[static_cast<std::size_t>(i)];
    r.episode = i;
    r.code = tape.codes[static_cast<std::size_t>(i)];
    for (auto [s, col] : tape.agent_steps[static_cast<std::size_t>(i)]) {
      const DecStepTape<Scalar>& step = tape.dec[static_cast<std::size_t>(s)];
      r.actions.emplace_back(double(step.Exec(0, col)),
                             double(step.Exec(1, col)));
      r.means.emplace_back(double(step.Mean(0, col)),
                           double(step.Mean(1, col)));
      r.log_probs.push_back(double(step.OldLogp(col)));
      r.gate_hits.push_back(step.gate_hit[static_cast<std::size_t>(col)]);
    }
  }
  return results;
}

/// Teacher-forced pass: recomputes every parameter-dependent cache of the
/// tape under `net`, holding the recorded inputs, vicinity structure and
/// sampled actions fixed. At the rollout parameters this reproduces the
/// recorded means bit-exactly.
template <class Scalar>
void replay_forward(const PolicyNet<Scalar>& net, BatchTape<Scalar>& tape) {
  detail::run_encoder(net, tape);
  MatX<Scalar> Hcur = tape.EncH;
  MatX<Scalar> Ccur = tape.EncC;
  for (DecStepTape<Scalar>& step : tape.dec) {
    MatX<Scalar> Hout, Cout;
    detail::compute_dec_step(net, tape, step, Hcur, Ccur, Hout, Cout);
    detail::scatter_cols(Hcur, step.active, Hout);
    detail::scatter_cols(Ccur, step.active, Cout);
  }
}

/// Exact reverse pass over a recorded batch. `dMean`/`dExec` give the
/// objective gradient w.r.t. each decode step's means and executed outputs
/// (entries aligned with tape.dec; null means zero). With `through_dynamics`
/// the executed-position feedback and the collision gate branches carry
/// gradient (valid for deterministic tapes only); without it, inputs are
/// treated as fixed data, which is the policy-gradient convention. Parameter
/// gradients accumulate into `grad`.
template <class Scalar>
void rollout_backward(const PolicyNet<Scalar>& net,
                      const BatchTape<Scalar>& tape,
                      const std::vector<MatX<Scalar>>* dMean,
                      const std::vector<MatX<Scalar>>* dExec,
                      bool through_dynamics, PolicyNet<Scalar>& grad) {
  const int b = tape.batch;
  const int h = net.hidden;
  if (through_dynamics && tape.stochastic)
    throw ConfigError(
        "rollout_backward: dynamics gradients need a deterministic tape");

  MatX<Scalar> dHcur = MatX<Scalar>::Zero(h, b);
  MatX<Scalar> dCcur = MatX<Scalar>::Zero(h, b);
  MatX<Scalar> dEncH = MatX<Scalar>::Zero(h, b);
  MatX<Scalar> dEncC = MatX<Scalar>::Zero(h, b);
  MatX<Scalar> dExecNext = MatX<Scalar>::Zero(2, b);

  std::vector<int> col_of(static_cast<std::size_t>(b), -1);

  for (int s = static_cast<int>(tape.dec.size()) - 1; s >= 0; --s) {
    const DecStepTape<Scalar>& step = tape.dec[static_cast<std::size_t>(s)];
    const auto a = static_cast<Eigen::Index>(step.active.size());
    for (Eigen::Index ca = 0; ca < a; ++ca)
      col_of[static_cast<std::size_t>(step.active[static_cast<std::size_t>(ca)])] =
          static_cast<int>(ca);

    MatX<Scalar> dMeanT = dMean ? (*dMean)[static_cast<std::size_t>(s)]
                                : MatX<Scalar>::Zero(2, a);
    MatX<Scalar> dXgate = MatX<Scalar>::Zero(2, a);
    if (through_dynamics) {
      MatX<Scalar> dExecT = dExec ? (*dExec)[static_cast<std::size_t>(s)]
                                  : MatX<Scalar>::Zero(2, a);
      for (Eigen::Index ca = 0; ca < a; ++ca) {
        int i = step.active[static_cast<std::size_t>(ca)];
        dExecT.col(ca) += dExecNext.col(i);
        dExecNext.col(i).setZero();
        if (step.gate_hit[static_cast<std::size_t>(ca)])
          dXgate.col(ca) += dExecT.col(ca);  // held: gradient to the previous position
        else
          dMeanT.col(ca) += dExecT.col(ca);  // pass-through: candidate == mean
      }
    }

    // fc_out <- code injection <- ReLU <- fc_hidden
    MatX<Scalar> dFcIn = net.fc_out.backward(step.FcIn, dMeanT, grad.fc_out);
    if (tape.has_codes) {
      MatX<Scalar> codes = detail::gather_cols(tape.CodeOnehot, step.active);
      grad.code_embed.W.noalias() += dFcIn * codes.transpose();
      grad.code_embed.b.noalias() += dFcIn.rowwise().sum();
    }
    MatX<Scalar> dFcPre = relu_backward(step.FcPre, dFcIn);
    MatX<Scalar> dHpost =
        net.fc_hidden.backward(step.Hpost, dFcPre, grad.fc_hidden);

    // Add gradients coming from later consumers of this step's state.
    for (Eigen::Index ca = 0; ca < a; ++ca) {
      int i = step.active[static_cast<std::size_t>(ca)];
      dHpost.col(ca) += dHcur.col(i);
      dHcur.col(i).setZero();
    }
    MatX<Scalar> dCtot(h, a);
    for (Eigen::Index ca = 0; ca < a; ++ca) {
      int i = step.active[static_cast<std::size_t>(ca)];
      dCtot.col(ca) = dCcur.col(i);
      dCcur.col(i).setZero();
    }

    auto add_state_grad = [&](int agent, int step_k, const auto& hgrad,
                              const auto* cgrad) {
      if (step_k == 0) {
        dEncH.col(agent) += hgrad;
        if (cgrad) dEncC.col(agent) += *cgrad;
      } else {
        dHcur.col(agent) += hgrad;
        if (cgrad) dCcur.col(agent) += *cgrad;
      }
    };

    if (tape.vicinity) {
      grad.vic_embed.W.noalias() += dHpost * step.VicFlat.transpose();
      grad.vic_embed.b.noalias() += dHpost.rowwise().sum();
      MatX<Scalar> dVic = net.vic_embed.W.transpose() * dHpost;
      for (Eigen::Index ca = 0; ca < a; ++ca) {
        for (const VicEntry& e : step.vic[static_cast<std::size_t>(ca)]) {
          int kj = step.step_index[static_cast<std::size_t>(
              col_of[static_cast<std::size_t>(e.neighbor)])];
          VecX<Scalar> slice = dVic.block(e.cell * h, ca, h, 1);
          add_state_grad(e.neighbor, kj, slice,
                         static_cast<const VecX<Scalar>*>(nullptr));
        }
      }
    }

    MatX<Scalar> dXin, dHprev, dCprev;
    lstm_backward(net.dec, step.cell, dHpost, dCtot, grad.dec, dXin, dHprev,
                  dCprev);

    for (Eigen::Index ca = 0; ca < a; ++ca) {
      int i = step.active[static_cast<std::size_t>(ca)];
      int k = step.step_index[static_cast<std::size_t>(ca)];
      VecX<Scalar> hg = dHprev.col(ca);
      VecX<Scalar> cg = dCprev.col(ca);
      add_state_grad(i, k, hg, &cg);
      if (through_dynamics) {
        Vec2<Scalar> dx = dXin.col(ca) + dXgate.col(ca);
        if (k > 0) dExecNext.col(i) += dx;  // k == 0 input is the constant x_T1
      }
    }
  }

  // Encoder BPTT from the accumulated final-state gradients.
  MatX<Scalar> dH = std::move(dEncH);
  MatX<Scalar> dC = std::move(dEncC);
  for (int t = static_cast<int>(tape.enc.size()) - 1; t >= 0; --t) {
    MatX<Scalar> dXdrop, dHprev, dCprev;
    lstm_backward(net.enc, tape.enc[static_cast<std::size_t>(t)].cell, dH, dC,
                  grad.enc, dXdrop, dHprev, dCprev);
    dH = std::move(dHprev);
    dC = std::move(dCprev);
  }
}

}  // namespace crowdmimic
