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

#include "crowdmimic/adversary/nets.hpp"

namespace crowdmimic {

/// Probability clamp applied inside every loss so no evaluation can produce
/// a non-finite value.
inline constexpr double kProbClamp = 1e-7;

inline double clamp_prob(double p) {
  return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

/// Loss value on already-computed probabilities:
/// mean(-log p_real) + mean(-log(1 - p_fake)), clamped.
inline double d_loss_from_probs(const std::vector<double>& p_real,
                                const std::vector<double>& p_fake) {
  if (p_real.empty() || p_fake.empty())
    throw DataError("d_loss: real and fake batches must be non-empty");
  double lr = 0, lf = 0;
  for (double p : p_real) lr += -std::log(clamp_prob(p));
  for (double p : p_fake) lf += -std::log(1.0 - clamp_prob(p));
  return lr / static_cast<double>(p_real.size()) +
         lf / static_cast<double>(p_fake.size());
}

/// Q loss on already-computed log-probabilities of the true codes.
inline double q_loss_from_logq(const std::vector<double>& logq_true,
                               double lambda) {
  if (logq_true.empty()) throw DataError("q_loss: empty batch");
  double s = 0;
  for (double lq : logq_true)
    s += std::min(std::max(lq, std::log(kProbClamp)),
                  std::log(1.0 - kProbClamp));
  return -lambda * s / static_cast<double>(logq_true.size());
}

/// Probability that a trajectory is real.
template <class Scalar>
double discriminate(const DiscriminatorNet<Scalar>& d,
                    const FullTrajectory& traj) {
  std::vector<FullTrajectory> one{traj};
  MatX<Scalar> logits = seq_logits(d.net, one, (SeqTape<Scalar>*)nullptr);
  double p = 1.0 / (1.0 + std::exp(-double(logits(0, 0))));
  return clamp_prob(p);
}

/// Log-probabilities over the K codes via log-sum-exp (no underflow).
template <class Scalar>
VecXd log_posterior(const PosteriorNet<Scalar>& q, const FullTrajectory& traj) {
  std::vector<FullTrajectory> one{traj};
  MatX<Scalar> logits = seq_logits(q.net, one, (SeqTape<Scalar>*)nullptr);
  VecXd z = logits.col(0).template cast<double>();
  double zmax = z.maxCoeff();
  double lse = zmax + std::log((z.array() - zmax).exp().sum());
  return z.array() - lse;
}

/// Posterior distribution over codes (non-negative, sums to one).
template <class Scalar>
VecXd posterior_dist(const PosteriorNet<Scalar>& q, const FullTrajectory& traj) {
  return log_posterior(q, traj).array().exp();
}

template <class Scalar>
struct DLossStats {
  Scalar loss = 0;
  Scalar accuracy = 0;
};

/// Discriminator loss over two batches; when `grad` is non-null the
/// parameter gradient is accumulated into it.
template <class Scalar>
DLossStats<Scalar> d_loss(const DiscriminatorNet<Scalar>& d,
                          const std::vector<FullTrajectory>& reals,
                          const std::vector<FullTrajectory>& fakes,
                          SeqScorer<Scalar>* grad) {
  if (reals.empty() || fakes.empty())
    throw DataError("d_loss: real and fake batches must be non-empty");
  const auto nr = static_cast<double>(reals.size());
  const auto nf = static_cast<double>(fakes.size());

  SeqTape<Scalar> tape_r, tape_f;
  MatX<Scalar> zr = seq_logits(d.net, reals, grad ? &tape_r : nullptr);
  MatX<Scalar> zf = seq_logits(d.net, fakes, grad ? &tape_f : nullptr);

  double loss = 0;
  double correct = 0;
  MatX<Scalar> dzr = MatX<Scalar>::Zero(1, zr.cols());
  MatX<Scalar> dzf = MatX<Scalar>::Zero(1, zf.cols());
  for (Eigen::Index i = 0; i < zr.cols(); ++i) {
    double p = 1.0 / (1.0 + std::exp(-double(zr(0, i))));
    if (p >= 0.5) correct += 1;
    bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
    loss += -std::log(clamp_prob(p)) / nr;
    if (!clamped) dzr(0, i) = Scalar((p - 1.0) / nr);
  }
  for (Eigen::Index i = 0; i < zf.cols(); ++i) {
    double p = 1.0 / (1.0 + std::exp(-double(zf(0, i))));
    if (p < 0.5) correct += 1;
    bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
    loss += -std::log(1.0 - clamp_prob(p)) / nf;
    if (!clamped) dzf(0, i) = Scalar(p / nf);
  }
  if (grad) {
    seq_backward(d.net, tape_r, dzr, *grad);
    seq_backward(d.net, tape_f, dzf, *grad);
  }
  return {Scalar(loss), Scalar(correct / (nr + nf))};
}

/// Posterior loss -lambda * mean log Q(c_true | traj); gradient optional.
template <class Scalar>
Scalar q_loss(const PosteriorNet<Scalar>& q,
              const std::vector<FullTrajectory>& fakes,
              const std::vector<int>& codes, Scalar lambda,
              SeqScorer<Scalar>* grad) {
  if (fakes.empty()) throw DataError("q_loss: empty batch");
  if (codes.size() != fakes.size())
    throw DataError("q_loss: every trajectory needs the code that generated it");
  const auto n = static_cast<double>(fakes.size());

  SeqTape<Scalar> tape;
  MatX<Scalar> z = seq_logits(q.net, fakes, grad ? &tape : nullptr);
  MatX<Scalar> dz = MatX<Scalar>::Zero(z.rows(), z.cols());
  const double lo = std::log(kProbClamp);
  const double hi = std::log(1.0 - kProbClamp);

  double loss = 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    int c = codes[static_cast<std::size_t>(i)];
    if (c < 0 || c >= q.code_dim)
      throw DataError("q_loss: code index out of range");
    VecXd col = z.col(i).template cast<double>();
    double zmax = col.maxCoeff();
    double lse = zmax + std::log((col.array() - zmax).exp().sum());
    double lq = col(c) - lse;
    bool clamped = lq < lo || lq > hi;
    loss += -double(lambda) * std::min(std::max(lq, lo), hi) / n;
    if (grad && !clamped) {
      VecXd soft = (col.array() - lse).exp();
      for (Eigen::Index k = 0; k < z.rows(); ++k)
        dz(k, i) = Scalar(double(lambda) / n *
                          (soft(k) - (k == c ? 1.0 : 0.0)));
    }
  }
  if (grad) seq_backward(q.net, tape, dz, *grad);
  return Scalar(loss);
}

/// Episodic reward for one generated trajectory:
/// log D(traj) + lambda * log Q(c | traj); clamped on both terms. Pass
/// q = nullptr (and code < 0) when intention inference is off.
template <class Scalar>
double reward_signal(const DiscriminatorNet<Scalar>& d,
                     const PosteriorNet<Scalar>* q, const FullTrajectory& traj,
                     int code, double lambda) {
  if ((q != nullptr) != (code >= 0))
    throw ConfigError("reward_signal: code must be supplied iff Q is supplied");
  double r = std::log(discriminate(d, traj));
  if (q) {
    VecXd lq = log_posterior(*q, traj);
    r += lambda * std::min(std::max(lq(code), std::log(kProbClamp)),
                           std::log(1.0 - kProbClamp));
  }
  return r;
}

/// Mutual-information lower bound: mean log Q(c|traj) + H(c) with the
/// uniform categorical prior, H(c) = ln K. Never exceeds H(c).
template <class Scalar>
double mi_lower_bound(const PosteriorNet<Scalar>& q,
                      const std::vector<FullTrajectory>& fakes,
                      const std::vector<int>& codes) {
  if (fakes.empty() || codes.size() != fakes.size())
    throw DataError("mi_lower_bound: every trajectory needs its code");
  double s = 0;
  for (std::size_t i = 0; i < fakes.size(); ++i) {
    VecXd lq = log_posterior(q, fakes[i]);
    s += std::min(std::max(lq(codes[i]), std::log(kProbClamp)),
                  std::log(1.0 - kProbClamp));
  }
  return s / static_cast<double>(fakes.size()) +
         std::log(static_cast<double>(q.code_dim));
}

}  // namespace crowdmimic
