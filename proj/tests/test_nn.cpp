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

#include "crowdmimic/core/rng.hpp"
#include "crowdmimic/nn/dense.hpp"
#include "crowdmimic/nn/lstm.hpp"
#include "testutil.hpp"

using namespace crowdmimic;
using cmtest::fd_gradient;
using cmtest::max_rel_err;

namespace {

// Flattens a cell plus inputs into one vector for finite differencing.
struct LstmChainProblem {
  int in = 3, hidden = 4, batch = 2, steps = 3;

  double value(const VecXd& theta) const {
    LstmCell<double> cell = LstmCell<double>::zeros(in, hidden);
    Eigen::Index at = 0;
    Eigen::Map<VecXd>(cell.W.data(), cell.W.size()) =
        theta.segment(at, cell.W.size());
    at += cell.W.size();
    cell.b = theta.segment(at, cell.b.size());
    at += cell.b.size();
    MatXd X0(in, batch), X1(in, batch), X2(in, batch);
    Eigen::Map<VecXd>(X0.data(), X0.size()) = theta.segment(at, X0.size());
    at += X0.size();
    Eigen::Map<VecXd>(X1.data(), X1.size()) = theta.segment(at, X1.size());
    at += X1.size();
    Eigen::Map<VecXd>(X2.data(), X2.size()) = theta.segment(at, X2.size());

    MatXd H = MatXd::Zero(hidden, batch), C = MatXd::Zero(hidden, batch);
    MatXd Hn, Cn;
    for (const MatXd* X : {&X0, &X1, &X2}) {
      lstm_forward(cell, *X, H, C, Hn, Cn, (LstmStepCache<double>*)nullptr);
      H = Hn;
      C = Cn;
    }
    return H.sum() + 0.5 * C.sum();
  }
};

}  // namespace

TEST_CASE("lstm chain gradients match finite differences") {
  LstmChainProblem prob;
  Rng rng(7);
  const int n_cell = 4 * prob.hidden * (prob.in + prob.hidden) + 4 * prob.hidden;
  const int n_inputs = prob.in * prob.batch * prob.steps;
  VecXd theta(n_cell + n_inputs);
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    theta(i) = rng.uniform(-0.5, 0.5);

  // Analytic gradient via BPTT over the same chain.
  LstmCell<double> cell = LstmCell<double>::zeros(prob.in, prob.hidden);
  Eigen::Index at = 0;
  Eigen::Map<VecXd>(cell.W.data(), cell.W.size()) =
      theta.segment(at, cell.W.size());
  at += cell.W.size();
  cell.b = theta.segment(at, cell.b.size());
  at += cell.b.size();
  std::vector<MatXd> X(3);
  for (int t = 0; t < 3; ++t) {
    X[t].resize(prob.in, prob.batch);
    Eigen::Map<VecXd>(X[t].data(), X[t].size()) =
        theta.segment(at, X[t].size());
    at += X[t].size();
  }

  std::vector<LstmStepCache<double>> caches(3);
  MatXd H = MatXd::Zero(prob.hidden, prob.batch);
  MatXd C = MatXd::Zero(prob.hidden, prob.batch);
  for (int t = 0; t < 3; ++t) {
    MatXd Hn, Cn;
    lstm_forward(cell, X[t], H, C, Hn, Cn, &caches[t]);
    H = Hn;
    C = Cn;
  }
  LstmCell<double> grad = LstmCell<double>::zeros(prob.in, prob.hidden);
  MatXd dH = MatXd::Ones(prob.hidden, prob.batch);
  MatXd dC = MatXd::Constant(prob.hidden, prob.batch, 0.5);
  std::vector<MatXd> dX(3);
  for (int t = 2; t >= 0; --t) {
    MatXd dHprev, dCprev;
    lstm_backward(cell, caches[t], dH, dC, grad, dX[t], dHprev, dCprev);
    dH = dHprev;
    dC = dCprev;
  }
  VecXd analytic(theta.size());
  at = 0;
  analytic.segment(at, grad.W.size()) =
      Eigen::Map<VecXd>(grad.W.data(), grad.W.size());
  at += grad.W.size();
  analytic.segment(at, grad.b.size()) = grad.b;
  at += grad.b.size();
  for (int t = 0; t < 3; ++t) {
    analytic.segment(at, dX[t].size()) =
        Eigen::Map<VecXd>(dX[t].data(), dX[t].size());
    at += dX[t].size();
  }

  VecXd numeric = fd_gradient([&](const VecXd& th) { return prob.value(th); },
                              theta);
  CHECK(max_rel_err(analytic, numeric) < 1e-6);
}

TEST_CASE("dense backward matches finite differences") {
  Rng rng(3);
  Dense<double> layer = Dense<double>::init(4, 5, rng);
  MatXd X(5, 3);
  for (int i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-1, 1);

  auto value = [&](const VecXd& theta) {
    Dense<double> l = layer;
    Eigen::Index at = 0;
    Eigen::Map<VecXd>(l.W.data(), l.W.size()) = theta.segment(at, l.W.size());
    at += l.W.size();
    l.b = theta.segment(at, l.b.size());
    return relu<double>(l.forward(X)).sum();
  };
  VecXd theta(layer.W.size() + layer.b.size());
  theta << Eigen::Map<VecXd>(layer.W.data(), layer.W.size()), layer.b;

  MatXd pre = layer.forward(X);
  MatXd dY = relu_backward<double>(pre, MatXd::Ones(4, 3));
  Dense<double> grad = Dense<double>::zeros(4, 5);
  layer.backward(X, dY, grad);
  VecXd analytic(theta.size());
  analytic << Eigen::Map<VecXd>(grad.W.data(), grad.W.size()), grad.b;

  VecXd numeric = fd_gradient(value, theta);
  CHECK(max_rel_err(analytic, numeric) < 1e-6);
}

TEST_CASE("lstm zero parameters give zero hidden state") {
  LstmCell<double> cell = LstmCell<double>::zeros(2, 8);
  MatXd X = MatXd::Constant(2, 1, 0.7);
  MatXd H = MatXd::Zero(8, 1), C = MatXd::Zero(8, 1), Hn, Cn;
  lstm_forward(cell, X, H, C, Hn, Cn, (LstmStepCache<double>*)nullptr);
  CHECK(Hn.cwiseAbs().maxCoeff() == 0.0);
  CHECK(Cn.cwiseAbs().maxCoeff() == 0.0);
}
