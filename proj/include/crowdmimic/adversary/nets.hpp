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

#include <string>
#include <vector>

#include "crowdmimic/core/error.hpp"
#include "crowdmimic/core/rng.hpp"
#include "crowdmimic/core/tensor_store.hpp"
#include "crowdmimic/core/types.hpp"
#include "crowdmimic/nn/dense.hpp"
#include "crowdmimic/nn/lstm.hpp"

namespace crowdmimic {

/// A full trajectory [observed, future] as fed to the critics.
using FullTrajectory = std::vector<Vec2d>;

/// Recurrent trunk over a whole trajectory plus an affine head on the last
/// hidden state. The discriminator and the posterior share this shape with
/// different head widths.
template <class Scalar>
struct SeqScorer {
  LstmCell<Scalar> cell;  // input 2
  Dense<Scalar> head;     // H -> out
  int hidden = 0;
  int expect_len = 0;

  static SeqScorer create(int hidden, int out, int expect_len, Rng& rng) {
    SeqScorer s;
    s.hidden = hidden;
    s.expect_len = expect_len;
    Rng r_cell = rng.fork("cell");
    Rng r_head = rng.fork("head");
    s.cell = LstmCell<Scalar>::init(2, hidden, r_cell);
    s.head = Dense<Scalar>::init(out, hidden, r_head);
    return s;
  }

  SeqScorer zeros_like() const {
    SeqScorer g = *this;
    g.cell.W.setZero();
    g.cell.b.setZero();
    g.head.W.setZero();
    g.head.b.setZero();
    return g;
  }

  void add_scaled(const SeqScorer& other, Scalar a) {
    cell.W += a * other.cell.W;
    cell.b += a * other.cell.b;
    head.W += a * other.head.W;
    head.b += a * other.head.b;
  }

  long long param_count() const {
    return cell.W.size() + cell.b.size() + head.W.size() + head.b.size();
  }

  VecX<Scalar> to_vector() const {
    VecX<Scalar> out(param_count());
    long long at = 0;
    out.segment(at, cell.W.size()) =
        Eigen::Map<const VecX<Scalar>>(cell.W.data(), cell.W.size());
    at += cell.W.size();
    out.segment(at, cell.b.size()) = cell.b;
    at += cell.b.size();
    out.segment(at, head.W.size()) =
        Eigen::Map<const VecX<Scalar>>(head.W.data(), head.W.size());
    at += head.W.size();
    out.segment(at, head.b.size()) = head.b;
    return out;
  }

  void from_vector(const VecX<Scalar>& flat) {
    if (flat.size() != param_count())
      throw ConfigError("scorer parameter vector has wrong length");
    long long at = 0;
    Eigen::Map<VecX<Scalar>>(cell.W.data(), cell.W.size()) =
        flat.segment(at, cell.W.size());
    at += cell.W.size();
    cell.b = flat.segment(at, cell.b.size());
    at += cell.b.size();
    Eigen::Map<VecX<Scalar>>(head.W.data(), head.W.size()) =
        flat.segment(at, head.W.size());
    at += head.W.size();
    head.b = flat.segment(at, head.b.size());
  }

  void to_store(TensorStore& store, const std::string& prefix) const {
    store.put_scalar(prefix + "hidden", hidden);
    store.put_scalar(prefix + "expect_len", expect_len);
    store.put(prefix + "cell.W", cell.W.template cast<double>());
    store.put(prefix + "cell.b", cell.b.template cast<double>());
    store.put(prefix + "head.W", head.W.template cast<double>());
    store.put(prefix + "head.b", head.b.template cast<double>());
  }

  static SeqScorer from_store(const TensorStore& store,
                              const std::string& prefix) {
    SeqScorer s;
    s.hidden = static_cast<int>(store.scalar(prefix + "hidden"));
    s.expect_len = static_cast<int>(store.scalar(prefix + "expect_len"));
    s.cell.W = store.get(prefix + "cell.W").template cast<Scalar>();
    s.cell.b = store.get(prefix + "cell.b").col(0).template cast<Scalar>();
    s.head.W = store.get(prefix + "head.W").template cast<Scalar>();
    s.head.b = store.get(prefix + "head.b").col(0).template cast<Scalar>();
    if (s.cell.hidden_size() != s.hidden ||
        s.head.W.cols() != s.hidden)
      throw ConfigError("checkpoint scorer shape mismatch under " + prefix);
    return s;
  }
};

template <class Scalar>
struct SeqTape {
  std::vector<MatX<Scalar>> X;  // per step, 2 x n
  std::vector<LstmStepCache<Scalar>> cells;
  MatX<Scalar> Hlast;  // H x n
};

/// Runs the trunk over a batch of equally long trajectories and returns the
/// head outputs (out x n). Throws on any trajectory of the wrong length.
template <class Scalar>
MatX<Scalar> seq_logits(const SeqScorer<Scalar>& scorer,
                        const std::vector<FullTrajectory>& trajs,
                        SeqTape<Scalar>* tape) {
  if (trajs.empty()) throw DataError("seq_logits: empty batch");
  const auto n = static_cast<Eigen::Index>(trajs.size());
  const int len = scorer.expect_len;
  for (const FullTrajectory& t : trajs) {
    if (static_cast<int>(t.size()) != len)
      throw ConfigError("trajectory length " + std::to_string(t.size()) +
                        " does not match the critic input length " +
                        std::to_string(len));
    for (const Vec2d& p : t)
      if (!p.allFinite())
        throw NumericError("seq_logits: non-finite trajectory point");
  }

  MatX<Scalar> H = MatX<Scalar>::Zero(scorer.hidden, n);
  MatX<Scalar> C = MatX<Scalar>::Zero(scorer.hidden, n);
  if (tape) {
    tape->X.resize(static_cast<std::size_t>(len));
    tape->cells.resize(static_cast<std::size_t>(len));
  }
  for (int t = 0; t < len; ++t) {
    MatX<Scalar> X(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec2d& p = trajs[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      X(0, i) = Scalar(p.x());
      X(1, i) = Scalar(p.y());
    }
    MatX<Scalar> Hn, Cn;
    lstm_forward(scorer.cell, X, H, C, Hn, Cn,
                 tape ? &tape->cells[static_cast<std::size_t>(t)] : nullptr);
    if (tape) tape->X[static_cast<std::size_t>(t)] = std::move(X);
    H = std::move(Hn);
    C = std::move(Cn);
  }
  if (tape) tape->Hlast = H;
  return scorer.head.forward(H);
}

/// Backprop from head-output gradients into the scorer parameters.
template <class Scalar>
void seq_backward(const SeqScorer<Scalar>& scorer, const SeqTape<Scalar>& tape,
                  const MatX<Scalar>& dLogits, SeqScorer<Scalar>& grad) {
  MatX<Scalar> dH = scorer.head.backward(tape.Hlast, dLogits, grad.head);
  MatX<Scalar> dC = MatX<Scalar>::Zero(dH.rows(), dH.cols());
  for (int t = static_cast<int>(tape.cells.size()) - 1; t >= 0; --t) {
    MatX<Scalar> dX, dHprev, dCprev;
    lstm_backward(scorer.cell, tape.cells[static_cast<std::size_t>(t)], dH, dC,
                  grad.cell, dX, dHprev, dCprev);
    dH = std::move(dHprev);
    dC = std::move(dCprev);
  }
}

/// Real-vs-generated trajectory classifier; output strictly inside (0,1).
template <class Scalar>
struct DiscriminatorNet {
  SeqScorer<Scalar> net;

  static DiscriminatorNet create(int hidden, int expect_len, Rng& rng) {
    return DiscriminatorNet{SeqScorer<Scalar>::create(hidden, 1, expect_len, rng)};
  }
};

/// Latent-code recovery network; softmax head over K codes.
template <class Scalar>
struct PosteriorNet {
  SeqScorer<Scalar> net;
  int code_dim = 0;

  static PosteriorNet create(int hidden, int code_dim, int expect_len,
                             Rng& rng) {
    if (code_dim < 2)
      throw ConfigError("posterior: code dimension must be at least 2");
    return PosteriorNet{
        SeqScorer<Scalar>::create(hidden, code_dim, expect_len, rng), code_dim};
  }
};

}  // namespace crowdmimic
