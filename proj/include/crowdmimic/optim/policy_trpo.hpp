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

#include <vector>

#include "crowdmimic/core/parallel.hpp"
#include "crowdmimic/optim/trpo.hpp"
#include "crowdmimic/policy/rollout.hpp"

namespace crowdmimic {

/// The trust-region step specialised to the policy: the surrogate is the
/// probability-ratio objective over the recorded (teacher-forced) rollouts,
/// the KL is the per-step Gaussian mean shift at fixed log_std, and every
/// replay holds the recorded inputs and sampled actions fixed.
namespace policy_trpo {

template <class Scalar>
long long total_steps(const std::vector<BatchTape<Scalar>>& tapes) {
  long long n = 0;
  for (const BatchTape<Scalar>& t : tapes) n += t.total_steps();
  return n;
}

/// Surrogate and mean KL for the parameters currently loaded in `net`;
/// replays every tape (overwriting caches).
template <class Scalar>
std::pair<Scalar, Scalar> surrogate_and_kl(const PolicyNet<Scalar>& net,
                                           std::vector<BatchTape<Scalar>>& tapes,
                                           int workers) {
  const Vec2<Scalar> ls = net.log_std;
  const Vec2<Scalar> inv_var(std::exp(Scalar(-2) * ls(0)),
                             std::exp(Scalar(-2) * ls(1)));
  std::vector<Scalar> surr(tapes.size(), Scalar(0));
  std::vector<Scalar> kl(tapes.size(), Scalar(0));
  parallel_for(tapes.size(), workers, [&](std::size_t ti) {
    BatchTape<Scalar>& tape = tapes[ti];
    replay_forward(net, tape);
    Scalar s = 0, k = 0;
    for (const DecStepTape<Scalar>& step : tape.dec) {
      const auto a = static_cast<Eigen::Index>(step.active.size());
      for (Eigen::Index ca = 0; ca < a; ++ca) {
        Scalar lp_new = gaussian_log_prob<Scalar>(step.Sampled.col(ca),
                                                  step.Mean.col(ca), ls);
        int agent = step.active[static_cast<std::size_t>(ca)];
        s += std::exp(lp_new - step.OldLogp(ca)) * tape.advantage(agent);
        for (int d = 0; d < 2; ++d) {
          Scalar dm = step.Mean(d, ca) - step.OldMean(d, ca);
          k += Scalar(0.5) * dm * dm * inv_var(d);
        }
      }
    }
    surr[ti] = s;
    kl[ti] = k;
  });
  Scalar s_total = 0, k_total = 0;
  for (std::size_t i = 0; i < tapes.size(); ++i) {
    s_total += surr[i];
    k_total += kl[i];
  }
  Scalar n = Scalar(total_steps(tapes));
  return {s_total / n, k_total / n};
}

enum class SeedKind { SurrogateAtOrigin, KlGrad };

/// Gradient of the surrogate (at the behavior parameters) or of the mean KL
/// (at the parameters currently replayed into the tapes), as a flat vector.
template <class Scalar>
VecX<Scalar> gradient(const PolicyNet<Scalar>& net,
                      std::vector<BatchTape<Scalar>>& tapes, SeedKind kind,
                      int workers) {
  const Vec2<Scalar> ls = net.log_std;
  const Vec2<Scalar> inv_var(std::exp(Scalar(-2) * ls(0)),
                             std::exp(Scalar(-2) * ls(1)));
  const Scalar inv_n = Scalar(1) / Scalar(total_steps(tapes));
  std::vector<PolicyNet<Scalar>> grads(tapes.size());
  parallel_for(tapes.size(), workers, [&](std::size_t ti) {
    BatchTape<Scalar>& tape = tapes[ti];
    std::vector<MatX<Scalar>> dMean(tape.dec.size());
    for (std::size_t s = 0; s < tape.dec.size(); ++s) {
      const DecStepTape<Scalar>& step = tape.dec[s];
      const auto a = static_cast<Eigen::Index>(step.active.size());
      MatX<Scalar>& dm = dMean[s];
      dm.resize(2, a);
      for (Eigen::Index ca = 0; ca < a; ++ca) {
        int agent = step.active[static_cast<std::size_t>(ca)];
        for (int d = 0; d < 2; ++d) {
          if (kind == SeedKind::SurrogateAtOrigin) {
            // d/d mean of ratio*adv at the behavior parameters (ratio = 1).
            dm(d, ca) = tape.advantage(agent) *
                        (step.Sampled(d, ca) - step.Mean(d, ca)) * inv_var(d) *
                        inv_n;
          } else {
            dm(d, ca) =
                (step.Mean(d, ca) - step.OldMean(d, ca)) * inv_var(d) * inv_n;
          }
        }
      }
    }
    grads[ti] = net.zeros_like();
    rollout_backward(net, tape, &dMean,
                     (const std::vector<MatX<Scalar>>*)nullptr,
                     /*through_dynamics=*/false,
                     grads[ti]);
  });
  PolicyNet<Scalar> total = net.zeros_like();
  for (const PolicyNet<Scalar>& g : grads) total.add_scaled(g, Scalar(1));
  return total.to_vector();
}

}  // namespace policy_trpo

/// Runs one trust-region update on the policy from recorded rollouts whose
/// `advantage` fields are filled. Leaves the policy unchanged when the step
/// is rejected. Tape caches are clobbered.
template <class Scalar>
TrustRegionReport<Scalar> policy_trust_region_step(
    PolicyNet<Scalar>& net, std::vector<BatchTape<Scalar>>& tapes,
    const TrustRegionConfig<Scalar>& cfg, int workers = 1) {
  for (BatchTape<Scalar>& t : tapes)
    if (t.advantage.size() != t.batch)
      throw ConfigError("policy_trust_region_step: advantages not set");

  TrustRegionOps<Scalar> ops;
  ops.kl_grad_zero_at_origin = true;
  // The surrogate gradient uses the rollout-time caches, so it must be the
  // first evaluation; trust_region_step calls it before any replay.
  ops.surrogate_grad0 = [&]() {
    return policy_trpo::gradient(net, tapes,
                                 policy_trpo::SeedKind::SurrogateAtOrigin,
                                 workers);
  };
  ops.surrogate_and_kl = [&](const VecX<Scalar>& theta) {
    net.from_vector(theta);
    return policy_trpo::surrogate_and_kl(net, tapes, workers);
  };
  ops.kl_grad = [&](const VecX<Scalar>& theta) {
    net.from_vector(theta);
    policy_trpo::surrogate_and_kl(net, tapes, workers);  // refresh caches
    return policy_trpo::gradient(net, tapes, policy_trpo::SeedKind::KlGrad,
                                 workers);
  };

  VecX<Scalar> theta = net.to_vector();
  TrustRegionReport<Scalar> report = trust_region_step(theta, ops, cfg);
  net.from_vector(theta);
  return report;
}

}  // namespace crowdmimic
