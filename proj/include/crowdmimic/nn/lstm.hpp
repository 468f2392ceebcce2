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

#include "crowdmimic/core/rng.hpp"
#include "crowdmimic/core/types.hpp"

namespace crowdmimic {

/// Standard gated recurrent cell (input/forget/output gates plus candidate).
/// The four gate blocks are stacked as rows of one weight matrix applied to
/// the concatenated input [x; h_prev], so a whole batch advances with a
/// single GEMM per step. Gate row order: input, forget, output, candidate.
template <class Scalar>
struct LstmCell {
  MatX<Scalar> W;  // 4H x (in + H)
  VecX<Scalar> b;  // 4H

  static LstmCell zeros(int in, int hidden) {
    LstmCell c;
    c.W = MatX<Scalar>::Zero(4 * hidden, in + hidden);
    c.b = VecX<Scalar>::Zero(4 * hidden);
    return c;
  }

  /// Uniform(-range, range) weights, zero biases.
  static LstmCell init(int in, int hidden, Rng& rng, double range = 0.08) {
    LstmCell c = zeros(in, hidden);
    for (int j = 0; j < c.W.cols(); ++j)
      for (int i = 0; i < c.W.rows(); ++i)
        c.W(i, j) = Scalar(rng.uniform(-range, range));
    return c;
  }

  int hidden_size() const { return static_cast<int>(b.size()) / 4; }
  int input_size() const {
    return static_cast<int>(W.cols()) - hidden_size();
  }
};

/// Per-step quantities cached by the forward pass for exact backprop.
/// Matrices are H x A (A = batch columns); Z is (in+H) x A.
template <class Scalar>
struct LstmStepCache {
  MatX<Scalar> Z;      // [x; h_prev]
  MatX<Scalar> Cprev;
  MatX<Scalar> Ig, Fg, Og, Gg;  // post-activation gates
  MatX<Scalar> C, TanhC;
};

template <class Scalar>
MatX<Scalar> sigmoid(const MatX<Scalar>& x) {
  return ((-x.array()).exp() + Scalar(1)).inverse().matrix();
}

/// One batched cell step. X is in x A, Hprev/Cprev are H x A. Writes the new
/// state into Hout/Cout; fills `cache` when non-null.
template <class Scalar>
void lstm_forward(const LstmCell<Scalar>& cell, const MatX<Scalar>& X,
                  const MatX<Scalar>& Hprev, const MatX<Scalar>& Cprev,
                  MatX<Scalar>& Hout, MatX<Scalar>& Cout,
                  LstmStepCache<Scalar>* cache) {
  const int h = cell.hidden_size();
  const int in = cell.input_size();
  const auto a = static_cast<int>(X.cols());

  MatX<Scalar> Z(in + h, a);
  Z.topRows(in) = X;
  Z.bottomRows(h) = Hprev;

  MatX<Scalar> pre = (cell.W * Z).colwise() + cell.b;
  MatX<Scalar> Ig = sigmoid<Scalar>(pre.topRows(h));
  MatX<Scalar> Fg = sigmoid<Scalar>(pre.middleRows(h, h));
  MatX<Scalar> Og = sigmoid<Scalar>(pre.middleRows(2 * h, h));
  MatX<Scalar> Gg = pre.bottomRows(h).array().tanh().matrix();

  Cout = (Fg.array() * Cprev.array() + Ig.array() * Gg.array()).matrix();
  MatX<Scalar> TanhC = Cout.array().tanh().matrix();
  Hout = (Og.array() * TanhC.array()).matrix();

  if (cache) {
    cache->Z = std::move(Z);
    cache->Cprev = Cprev;
    cache->Ig = std::move(Ig);
    cache->Fg = std::move(Fg);
    cache->Og = std::move(Og);
    cache->Gg = std::move(Gg);
    cache->C = Cout;
    cache->TanhC = std::move(TanhC);
  }
}

/// Backprop through one cell step. dH/dC are gradients w.r.t. the step's
/// outputs; parameter gradients accumulate into `grad`; dX/dHprev/dCprev
/// receive the input gradients.
template <class Scalar>
void lstm_backward(const LstmCell<Scalar>& cell,
                   const LstmStepCache<Scalar>& cache, const MatX<Scalar>& dH,
                   const MatX<Scalar>& dC, LstmCell<Scalar>& grad,
                   MatX<Scalar>& dX, MatX<Scalar>& dHprev,
                   MatX<Scalar>& dCprev) {
  const int h = cell.hidden_size();
  const int in = cell.input_size();
  const auto a = static_cast<int>(cache.Z.cols());

  auto ig = cache.Ig.array();
  auto fg = cache.Fg.array();
  auto og = cache.Og.array();
  auto gg = cache.Gg.array();
  auto tc = cache.TanhC.array();

  MatX<Scalar> dCtotal =
      (dC.array() + dH.array() * og * (Scalar(1) - tc * tc)).matrix();

  MatX<Scalar> dpre(4 * h, a);
  dpre.topRows(h) = (dCtotal.array() * gg * ig * (Scalar(1) - ig)).matrix();
  dpre.middleRows(h, h) =
      (dCtotal.array() * cache.Cprev.array() * fg * (Scalar(1) - fg)).matrix();
  dpre.middleRows(2 * h, h) =
      (dH.array() * tc * og * (Scalar(1) - og)).matrix();
  dpre.bottomRows(h) =
      (dCtotal.array() * ig * (Scalar(1) - gg * gg)).matrix();

  grad.W.noalias() += dpre * cache.Z.transpose();
  grad.b.noalias() += dpre.rowwise().sum();

  MatX<Scalar> dZ = cell.W.transpose() * dpre;
  dX = dZ.topRows(in);
  dHprev = dZ.bottomRows(h);
  dCprev = (dCtotal.array() * fg).matrix();
}

}  // namespace crowdmimic
