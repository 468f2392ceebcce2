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

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "crowdmimic/adversary/losses.hpp"
#include "crowdmimic/core/parallel.hpp"
#include "crowdmimic/eval/metrics.hpp"
#include "crowdmimic/optim/policy_trpo.hpp"
#include "crowdmimic/trajdata/pipeline.hpp"

namespace crowdmimic {

struct TrainConfig {
  int iterations = 100;
  int episodes_per_iter = 32;
  double lambda = 1.0;
  int code_dim = 0;  // 0 disables intention inference
  bool gate = true;
  bool vicinity = true;
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // iterations; 0 = final checkpoint only
  double d_lr = 1e-3;
  double q_lr = 1e-3;
  int q_steps = 1;  // posterior gradient steps per iteration
  TrustRegionConfig<double> trpo;

  // Supervised baseline trainer.
  int epochs = 200;
  double lr = 1e-2;
  int batch_episodes = 32;

  int early_stop_patience = 0;  // iterations without val ADE improvement; 0 = off
  int workers = 1;

  void validate() const {
    if (iterations < 0) throw ConfigError("train: iterations must be >= 0");
    if (!(code_dim == 0 || code_dim == 2 || code_dim == 3))
      throw ConfigError("train: code_dim must be 0, 2 or 3");
    if (episodes_per_iter < 1)
      throw ConfigError("train: episodes_per_iter must be >= 1");
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (batch_episodes < 1)
      throw ConfigError("train: batch_episodes must be >= 1");
  }
};

/// One line of the training metrics log (fixed CSV schema).
struct MetricsRow {
  long long iter = 0;
  double d_loss = 0, d_acc = 0, mean_reward = 0, mi_lower_bound = 0;
  double val_ade = 0, val_fde = 0, val_normade = 0, collision_rate = 0, kl = 0;
  int step_accepted = 0;
  double aux_loss = 0;  // trainer-specific (not part of the CSV)
};

inline const char* metrics_csv_header() {
  return "iter,d_loss,d_acc,mean_reward,mi_lower_bound,val_ade,val_fde,"
         "val_normade,collision_rate,kl,step_accepted";
}

inline std::string metrics_csv_row(const MetricsRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%lld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d",
                r.iter, r.d_loss, r.d_acc, r.mean_reward, r.mi_lower_bound,
                r.val_ade, r.val_fde, r.val_normade, r.collision_rate, r.kl,
                r.step_accepted);
  return buf;
}

struct TrainLog {
  std::vector<MetricsRow> rows;
  std::string to_csv() const {
    std::string out = metrics_csv_header();
    out += '\n';
    for (const MetricsRow& r : rows) {
      out += metrics_csv_row(r);
      out += '\n';
    }
    return out;
  }
};

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_row;
  std::function<void(long long iter)> save_checkpoint;
};

/// Constant-velocity baseline: extrapolates the last observed step.
inline std::vector<Vec2d> constant_velocity_predict(const Episode& e) {
  if (e.observed.size() < 2)
    throw DataError("constant_velocity_predict: need at least 2 observations");
  Vec2d x = e.observed.back();
  Vec2d v = x - e.observed[e.observed.size() - 2];
  std::vector<Vec2d> out;
  out.reserve(e.future.size());
  for (std::size_t k = 1; k <= e.future.size(); ++k)
    out.push_back(x + static_cast<double>(k) * v);
  return out;
}

/// Adam accumulator over a flat parameter vector.
struct AdamState {
  VecXd m, v;
  long long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  /// Returns the update to subtract from the parameters.
  VecXd step(const VecXd& grad, double lr) {
    if (m.size() != grad.size()) {
      m = VecXd::Zero(grad.size());
      v = VecXd::Zero(grad.size());
      t = 0;
    }
    ++t;
    m = beta1 * m + (1 - beta1) * grad;
    v = (beta2 * v.array() + (1 - beta2) * grad.array().square()).matrix();
    double c1 = 1 - std::pow(beta1, static_cast<double>(t));
    double c2 = 1 - std::pow(beta2, static_cast<double>(t));
    return (lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps)).matrix();
  }
};

/// In-place whitening: subtract the mean and divide by the population
/// standard deviation plus 1e-8. Afterwards the values have mean ~0 and
/// standard deviation ~1 whenever the input variance was positive.
inline void whiten(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  double std_ = std::sqrt(std::max(var, 0.0));
  for (double& x : v) x = (x - mean) / (std_ + 1e-8);
}

/// Mean squared Euclidean error per step, normalized coordinates.
inline double mse_normalized(const std::vector<Vec2d>& pred,
                             const std::vector<Vec2d>& gt) {
  if (pred.size() != gt.size() || pred.empty())
    throw DataError("mse: length mismatch");
  double s = 0;
  for (std::size_t t = 0; t < pred.size(); ++t)
    s += (pred[t] - gt[t]).squaredNorm();
  return s / static_cast<double>(pred.size());
}

/// Deterministic evaluation over a batch list: per-episode displacement
/// metrics averaged across episodes plus the pooled generated-pair collision
/// rate. `fixed_code` selects the latent code when the policy carries one.
template <class Scalar>
MetricReport evaluate_policy(const PolicyNet<Scalar>& net,
                             const std::vector<FrameBatch>& batches,
                             const SceneSpec& scene, const RolloutOptions& opts,
                             int fixed_code = -1, int workers = 1) {
  MetricReport rep;
  if (batches.empty()) return rep;
  RolloutOptions det = opts;
  det.stochastic = false;

  std::vector<std::vector<RolloutResult>> all(batches.size());
  parallel_for(batches.size(), workers, [&](std::size_t bi) {
    std::vector<int> codes;
    if (net.code_dim > 0) {
      if (fixed_code < 0)
        throw ConfigError("evaluate_policy: coded policy needs a fixed code");
      codes.assign(static_cast<std::size_t>(batches[bi].size()), fixed_code);
    }
    all[bi] = rollout_batch(net, batches[bi], scene, codes, det, nullptr,
                            (BatchTape<Scalar>*)nullptr);
  });

  long long violations = 0, pair_steps = 0;
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const FrameBatch& batch = batches[bi];
    std::vector<AlignedTrack> tracks;
    for (const RolloutResult& r : all[bi]) {
      const Episode& e = batch.episodes[static_cast<std::size_t>(r.episode)];
      rep.norm_ade += norm_ade(r.actions, e.future);
      auto [ade, fde] = ade_fde(r.actions, e.future, scene);
      rep.ade_px += ade;
      rep.fde_px += fde;
      ++rep.n_episodes;
      AlignedTrack tr;
      tr.start = e.t0 + batch.t1;
      for (const Vec2d& p : r.actions) tr.points_px.push_back(scene.to_px(p));
      tracks.push_back(std::move(tr));
    }
    auto [v, p] = collision_counts(tracks, scene.collision_thresh_px);
    violations += v;
    pair_steps += p;
  }
  if (rep.n_episodes > 0) {
    rep.norm_ade /= static_cast<double>(rep.n_episodes);
    rep.ade_px /= static_cast<double>(rep.n_episodes);
    rep.fde_px /= static_cast<double>(rep.n_episodes);
  }
  rep.collision_rate =
      pair_steps == 0 ? 0.0
                      : static_cast<double>(violations) /
                            static_cast<double>(pair_steps);
  return rep;
}

/// Same evaluation for the constant-velocity baseline.
inline MetricReport evaluate_constant_velocity(
    const std::vector<FrameBatch>& batches, const SceneSpec& scene) {
  MetricReport rep;
  long long violations = 0, pair_steps = 0;
  for (const FrameBatch& batch : batches) {
    std::vector<AlignedTrack> tracks;
    for (const Episode& e : batch.episodes) {
      std::vector<Vec2d> pred = constant_velocity_predict(e);
      rep.norm_ade += norm_ade(pred, e.future);
      auto [ade, fde] = ade_fde(pred, e.future, scene);
      rep.ade_px += ade;
      rep.fde_px += fde;
      ++rep.n_episodes;
      AlignedTrack tr;
      tr.start = e.t0 + batch.t1;
      for (const Vec2d& p : pred) tr.points_px.push_back(scene.to_px(p));
      tracks.push_back(std::move(tr));
    }
    auto [v, p] = collision_counts(tracks, scene.collision_thresh_px);
    violations += v;
    pair_steps += p;
  }
  if (rep.n_episodes > 0) {
    rep.norm_ade /= static_cast<double>(rep.n_episodes);
    rep.ade_px /= static_cast<double>(rep.n_episodes);
    rep.fde_px /= static_cast<double>(rep.n_episodes);
  }
  rep.collision_rate =
      pair_steps == 0 ? 0.0
                      : static_cast<double>(violations) /
                            static_cast<double>(pair_steps);
  return rep;
}

namespace detail {

inline FullTrajectory make_full_trajectory(const Episode& e,
                                           const std::vector<Vec2d>& future) {
  FullTrajectory t;
  t.reserve(e.observed.size() + future.size());
  t.insert(t.end(), e.observed.begin(), e.observed.end());
  t.insert(t.end(), future.begin(), future.end());
  return t;
}

}  // namespace detail

/// Shared GAIL / SA-GAIL loop. Per iteration, following the alternating
/// single-update schedule: stochastic rollouts, one discriminator gradient
/// step, one posterior gradient step (when intention inference is on),
/// episodic rewards log D (+ lambda log Q), whitened advantages, then one
/// trust-region policy update. Divergent rollouts skip their batch; ten
/// consecutive skipped batches abort the run.
template <class Scalar>
TrainLog train_adversarial(PolicyNet<Scalar>& policy, DiscriminatorNet<Scalar>& d,
                           PosteriorNet<Scalar>* q, Dataset& data,
                           const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  if (q == nullptr && cfg.code_dim != 0)
    throw ConfigError("train: code_dim > 0 requires the posterior network");
  if (q != nullptr && (cfg.code_dim < 2 || policy.code_dim != cfg.code_dim ||
                       q->code_dim != cfg.code_dim))
    throw ConfigError("train: policy, posterior and config disagree on code_dim");
  if (q == nullptr && policy.code_dim != 0)
    throw ConfigError("train: plain imitation needs a code-free policy");

  TrainLog log;
  Rng root(cfg.seed);
  RolloutOptions roll_opts{/*stochastic=*/true, cfg.gate, cfg.vicinity};
  RolloutOptions det_opts{/*stochastic=*/false, cfg.gate, cfg.vicinity};

  // Pool of training episodes for sampling the discriminator's real batch.
  std::vector<const Episode*> real_pool;
  for (const FrameBatch& b : data.train)
    for (const Episode& e : b.episodes) real_pool.push_back(&e);
  if (real_pool.empty()) throw DataError("train: no training episodes");

  int consecutive_failures = 0;
  double best_val_ade = -1;
  int since_best = 0;
  AdamState q_adam;  // Q chases a weak, drifting signal; plain SGD stalls

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Rng r_iter = root.fork("rollout").fork(static_cast<std::uint64_t>(iter));

    std::vector<int> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    Rng r_shuffle = r_iter.fork("batches");
    r_shuffle.shuffle(order);
    std::vector<int> chosen;
    int n_eps = 0;
    for (int bi : order) {
      chosen.push_back(bi);
      n_eps += data.train[static_cast<std::size_t>(bi)].size();
      if (n_eps >= cfg.episodes_per_iter) break;
    }

    // Latent codes, one per episode, fixed through the rollout.
    std::vector<std::vector<int>> codes(chosen.size());
    if (q) {
      Rng rc = r_iter.fork("codes");
      for (std::size_t c = 0; c < chosen.size(); ++c) {
        const FrameBatch& b = data.train[static_cast<std::size_t>(chosen[c])];
        codes[c].resize(static_cast<std::size_t>(b.size()));
        for (int& code : codes[c])
          code = static_cast<int>(rc.uniform_int(cfg.code_dim));
      }
    }

    std::vector<BatchTape<Scalar>> tapes(chosen.size());
    std::vector<std::vector<RolloutResult>> results(chosen.size());
    std::vector<uint8_t> failed(chosen.size(), 0);
    parallel_for(chosen.size(), cfg.workers, [&](std::size_t c) {
      Rng r_batch = r_iter.fork("sample").fork(static_cast<std::uint64_t>(c));
      try {
        results[c] = rollout_batch(
            policy, data.train[static_cast<std::size_t>(chosen[c])], data.scene,
            codes[c], roll_opts, &r_batch, &tapes[c]);
      } catch (const NumericError&) {
        failed[c] = 1;
      }
    });

    std::vector<std::size_t> ok;
    for (std::size_t c = 0; c < chosen.size(); ++c) {
      if (failed[c]) {
        if (++consecutive_failures >= 10)
          throw NumericError(
              "training aborted: 10 consecutive divergent rollout batches");
      } else {
        consecutive_failures = 0;
        ok.push_back(c);
      }
    }

    MetricsRow row;
    row.iter = iter;
    if (!ok.empty()) {
      // Fake batch: full generated trajectories with their codes.
      std::vector<FullTrajectory> fakes;
      std::vector<int> fake_codes;
      for (std::size_t c : ok) {
        const FrameBatch& b = data.train[static_cast<std::size_t>(chosen[c])];
        for (const RolloutResult& r : results[c]) {
          fakes.push_back(detail::make_full_trajectory(
              b.episodes[static_cast<std::size_t>(r.episode)], r.actions));
          fake_codes.push_back(r.code);
        }
      }

      // Real batch of the same size, sampled from the training episodes.
      Rng r_real = root.fork("d-real").fork(static_cast<std::uint64_t>(iter));
      std::vector<FullTrajectory> reals;
      for (std::size_t i = 0; i < fakes.size(); ++i) {
        const Episode* e = real_pool[static_cast<std::size_t>(
            r_real.uniform_int(static_cast<std::int64_t>(real_pool.size())))];
        reals.push_back(detail::make_full_trajectory(*e, e->future));
      }

      SeqScorer<Scalar> d_grad = d.net.zeros_like();
      DLossStats<Scalar> ds = d_loss(d, reals, fakes, &d_grad);
      d.net.add_scaled(d_grad, Scalar(-cfg.d_lr));
      row.d_loss = double(ds.loss);
      row.d_acc = double(ds.accuracy);

      if (q) {
        for (int k = 0; k < std::max(cfg.q_steps, 1); ++k) {
          SeqScorer<Scalar> q_grad = q->net.zeros_like();
          q_loss(*q, fakes, fake_codes, Scalar(cfg.lambda), &q_grad);
          VecX<Scalar> q_theta = q->net.to_vector();
          q_theta -= q_adam.step(q_grad.to_vector(), cfg.q_lr);
          q->net.from_vector(q_theta);
        }
        row.mi_lower_bound = mi_lower_bound(*q, fakes, fake_codes);
      }

      // Episodic rewards under the freshly updated critics, whitened into
      // per-step advantages (constant across each rollout's steps).
      std::vector<double> rewards(fakes.size());
      for (std::size_t i = 0; i < fakes.size(); ++i)
        rewards[i] = reward_signal(d, q, fakes[i], q ? fake_codes[i] : -1,
                                   cfg.lambda);
      double r_mean = 0;
      for (double r : rewards) r_mean += r;
      r_mean /= static_cast<double>(rewards.size());
      row.mean_reward = r_mean;
      whiten(rewards);

      std::vector<BatchTape<Scalar>> ok_tapes;
      ok_tapes.reserve(ok.size());
      {
        std::size_t at = 0;
        for (std::size_t c : ok) {
          BatchTape<Scalar>& tape = tapes[c];
          tape.advantage.resize(tape.batch);
          for (int i = 0; i < tape.batch; ++i)
            tape.advantage(i) = Scalar(rewards[at++]);
          ok_tapes.push_back(std::move(tape));
        }
      }

      TrustRegionConfig<Scalar> tr;
      tr.max_kl = Scalar(cfg.trpo.max_kl);
      tr.cg_iters = cfg.trpo.cg_iters;
      tr.cg_damping = Scalar(cfg.trpo.cg_damping);
      tr.backtrack_ratio = Scalar(cfg.trpo.backtrack_ratio);
      tr.max_backtracks = cfg.trpo.max_backtracks;
      TrustRegionReport<Scalar> report =
          policy_trust_region_step(policy, ok_tapes, tr, cfg.workers);
      row.kl = report.accepted ? double(report.kl) : 0.0;
      row.step_accepted = report.accepted ? 1 : 0;
    }

    MetricReport val = evaluate_policy(policy, data.val, data.scene, det_opts,
                                       q ? 0 : -1, cfg.workers);
    row.val_ade = val.ade_px;
    row.val_fde = val.fde_px;
    row.val_normade = val.norm_ade;
    row.collision_rate = val.collision_rate;

    log.rows.push_back(row);
    if (hooks.on_row) hooks.on_row(row);
    if (hooks.save_checkpoint && cfg.checkpoint_every > 0 &&
        (iter + 1) % cfg.checkpoint_every == 0)
      hooks.save_checkpoint(iter + 1);

    if (cfg.early_stop_patience > 0 && val.n_episodes > 0) {
      if (best_val_ade < 0 || val.ade_px < best_val_ade) {
        best_val_ade = val.ade_px;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }
  return log;
}

/// Plain adversarial imitation: policy and discriminator only.
template <class Scalar>
TrainLog train_gail(PolicyNet<Scalar>& policy, DiscriminatorNet<Scalar>& d,
                    Dataset& data, const TrainConfig& cfg,
                    const TrainHooks& hooks = {}) {
  if (cfg.code_dim != 0)
    throw ConfigError("train_gail: code_dim must be 0");
  return train_adversarial(policy, d, (PosteriorNet<Scalar>*)nullptr, data, cfg,
                           hooks);
}

/// Full loop with latent intention codes and the posterior network.
template <class Scalar>
TrainLog train_sagail(PolicyNet<Scalar>& policy, DiscriminatorNet<Scalar>& d,
                      PosteriorNet<Scalar>& q, Dataset& data,
                      const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  if (cfg.code_dim != 2 && cfg.code_dim != 3)
    throw ConfigError("train_sagail: code_dim must be 2 or 3");
  return train_adversarial(policy, d, &q, data, cfg, hooks);
}

/// Supervised baseline trainer: deterministic rollouts (means as actions),
/// mean-squared-error on the executed futures, Adam updates. The social
/// flags select the vanilla / vicinity / gate baseline variants. When a
/// validation split exists the parameters with the best validation ADE are
/// restored at the end.
template <class Scalar>
TrainLog train_supervised(PolicyNet<Scalar>& policy, Dataset& data,
                          const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  if (policy.code_dim != 0)
    throw ConfigError("train_supervised: baselines use a code-free policy");
  TrainLog log;
  Rng root(cfg.seed);
  RolloutOptions opts{/*stochastic=*/false, cfg.gate, cfg.vicinity};
  AdamState adam;

  double best_val_ade = -1;
  int since_best = 0;
  VecX<Scalar> best_params;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = static_cast<int>(i);
    Rng r_shuffle =
        root.fork("data-shuffle").fork(static_cast<std::uint64_t>(epoch));
    r_shuffle.shuffle(order);

    double sse = 0;
    long long n_eps_total = 0;

    std::vector<int> group;
    int group_eps = 0;
    auto flush = [&]() {
      if (group.empty()) return;
      const int t2 = data.train[static_cast<std::size_t>(group.front())].t2;
      const double scale =
          1.0 / (static_cast<double>(group_eps) * static_cast<double>(t2));
      std::vector<PolicyNet<Scalar>> grads(group.size());
      std::vector<double> sses(group.size(), 0.0);
      parallel_for(group.size(), cfg.workers, [&](std::size_t gi) {
        const FrameBatch& batch =
            data.train[static_cast<std::size_t>(group[gi])];
        BatchTape<Scalar> tape;
        std::vector<RolloutResult> rolls = rollout_batch(
            policy, batch, data.scene, {}, opts, nullptr, &tape);
        // Seeds: d/dExec of mean squared error over the group.
        std::vector<MatX<Scalar>> dExec(tape.dec.size());
        for (std::size_t s = 0; s < tape.dec.size(); ++s)
          dExec[s] = MatX<Scalar>::Zero(2, static_cast<Eigen::Index>(
                                               tape.dec[s].active.size()));
        for (const RolloutResult& r : rolls) {
          const Episode& e =
              batch.episodes[static_cast<std::size_t>(r.episode)];
          const auto& steps =
              tape.agent_steps[static_cast<std::size_t>(r.episode)];
          for (std::size_t k = 0; k < steps.size(); ++k) {
            auto [s, col] = steps[k];
            Vec2d diff = r.actions[k] - e.future[k];
            sses[gi] += diff.squaredNorm();
            dExec[static_cast<std::size_t>(s)](0, col) =
                Scalar(2.0 * diff.x() * scale);
            dExec[static_cast<std::size_t>(s)](1, col) =
                Scalar(2.0 * diff.y() * scale);
          }
        }
        grads[gi] = policy.zeros_like();
        rollout_backward(policy, tape,
                         (const std::vector<MatX<Scalar>>*)nullptr, &dExec,
                         /*through_dynamics=*/true, grads[gi]);
      });
      PolicyNet<Scalar> total = policy.zeros_like();
      for (const PolicyNet<Scalar>& g : grads) total.add_scaled(g, Scalar(1));
      for (double s : sses) sse += s;
      VecX<Scalar> grad_vec = total.to_vector();
      if (!grad_vec.allFinite())
        throw NumericError("supervised training diverged: non-finite gradient");
      VecX<Scalar> theta = policy.to_vector();
      theta -= adam.step(grad_vec, cfg.lr);
      policy.from_vector(theta);
      n_eps_total += group_eps;
      group.clear();
      group_eps = 0;
    };

    for (int bi : order) {
      group.push_back(bi);
      group_eps += data.train[static_cast<std::size_t>(bi)].size();
      if (group_eps >= cfg.batch_episodes) flush();
    }
    flush();

    MetricReport val =
        evaluate_policy(policy, data.val, data.scene, opts, -1, cfg.workers);
    MetricsRow row;
    row.iter = epoch;
    row.val_ade = val.ade_px;
    row.val_fde = val.fde_px;
    row.val_normade = val.norm_ade;
    row.collision_rate = val.collision_rate;
    row.step_accepted = 1;
    row.aux_loss =
        n_eps_total > 0
            ? sse / (static_cast<double>(n_eps_total) *
                     static_cast<double>(data.train.front().t2))
            : 0.0;
    log.rows.push_back(row);
    if (hooks.on_row) hooks.on_row(row);
    if (hooks.save_checkpoint && cfg.checkpoint_every > 0 &&
        (epoch + 1) % cfg.checkpoint_every == 0)
      hooks.save_checkpoint(epoch + 1);

    if (val.n_episodes > 0) {
      if (best_val_ade < 0 || val.ade_px < best_val_ade) {
        best_val_ade = val.ade_px;
        best_params = policy.to_vector();
        since_best = 0;
      } else if (cfg.early_stop_patience > 0 &&
                 ++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }
  if (best_params.size() > 0) policy.from_vector(best_params);
  return log;
}

}  // namespace crowdmimic
