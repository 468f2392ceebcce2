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

#include <cmath>

#include "crowdmimic/adversary/losses.hpp"
#include "testutil.hpp"

using namespace crowdmimic;
using cmtest::fd_gradient;
using cmtest::max_rel_err;

namespace {

FullTrajectory random_traj(Rng& rng, int len = 7) {
  FullTrajectory t;
  for (int i = 0; i < len; ++i)
    t.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1));
  return t;
}

}  // namespace

TEST_CASE("discriminator output lies strictly inside (0,1)") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    Rng net_rng(rng.next_u64());
    auto d = DiscriminatorNet<double>::create(6, 7, net_rng);
    double p = discriminate(d, random_traj(rng));
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("zero head scores 0.5; identical inputs score identically") {
  Rng rng(2);
  auto d = DiscriminatorNet<double>::create(6, 7, rng);
  d.net.head.W.setZero();
  d.net.head.b.setZero();
  FullTrajectory t = random_traj(rng);
  CHECK(discriminate(d, t) == doctest::Approx(0.5).epsilon(1e-15));

  Rng rng2(3);
  auto d2 = DiscriminatorNet<double>::create(6, 7, rng2);
  CHECK(discriminate(d2, t) == discriminate(d2, t));
  FullTrajectory wrong = random_traj(rng, 9);
  CHECK_THROWS_AS(discriminate(d2, wrong), ConfigError);
}

TEST_CASE("posterior is a probability vector; uniform at zero head") {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    Rng net_rng(rng.next_u64());
    auto q = PosteriorNet<double>::create(5, 3, 7, net_rng);
    VecXd p = posterior_dist(q, random_traj(rng));
    CHECK(p.minCoeff() > 0.0);
    CHECK(p.maxCoeff() < 1.0);
    CHECK(std::abs(p.sum() - 1.0) < 1e-6);
  }
  Rng r5(5);
  auto q = PosteriorNet<double>::create(5, 3, 7, r5);
  q.net.head.W.setZero();
  q.net.head.b.setZero();
  VecXd p = posterior_dist(q, random_traj(r5));
  for (int k = 0; k < 3; ++k) CHECK(p(k) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  double entropy = -(p.array() * p.array().log()).sum();
  CHECK(entropy == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("d_loss: analytic values and non-negativity") {
  CHECK(d_loss_from_probs({0.5, 0.5}, {0.5}) ==
        doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
  // Perfect classifier collapses to the clamp floor.
  CHECK(d_loss_from_probs({1.0}, {0.0}) ==
        doctest::Approx(-2 * std::log(1.0 - kProbClamp)).epsilon(1e-6));
  CHECK(d_loss_from_probs({1.0}, {0.0}) > 0.0);
  CHECK_THROWS_AS(d_loss_from_probs({}, {0.5}), DataError);

  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    Rng net_rng(rng.next_u64());
    auto d = DiscriminatorNet<double>::create(5, 6, net_rng);
    std::vector<FullTrajectory> reals{random_traj(rng, 6), random_traj(rng, 6)};
    std::vector<FullTrajectory> fakes{random_traj(rng, 6)};
    auto stats = d_loss(d, reals, fakes, (SeqScorer<double>*)nullptr);
    CHECK(stats.loss >= 0.0);
  }

  Rng r7(7);
  auto d = DiscriminatorNet<double>::create(5, 6, r7);
  d.net.head.W.setZero();
  d.net.head.b.setZero();
  std::vector<FullTrajectory> reals{random_traj(r7, 6)};
  std::vector<FullTrajectory> fakes{random_traj(r7, 6)};
  auto stats = d_loss(d, reals, fakes, (SeqScorer<double>*)nullptr);
  CHECK(double(stats.loss) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("q_loss: analytic values") {
  CHECK(q_loss_from_logq({std::log(1.0 / 3)}, 1.0) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(q_loss_from_logq({0.0}, 1.0) > 0.0);  // perfect Q -> 0+
  CHECK(q_loss_from_logq({0.0}, 1.0) < 1e-6);
  CHECK(q_loss_from_logq({-2.3, -0.1}, 0.0) == 0.0);

  Rng rng(8);
  auto q = PosteriorNet<double>::create(5, 3, 6, rng);
  q.net.head.W.setZero();
  q.net.head.b.setZero();
  std::vector<FullTrajectory> fakes{random_traj(rng, 6), random_traj(rng, 6)};
  double loss = q_loss(q, fakes, {0, 2}, 1.0, (SeqScorer<double>*)nullptr);
  CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(q_loss(q, fakes, {1, 1}, 0.0, (SeqScorer<double>*)nullptr) == 0.0);
  CHECK_THROWS_AS(q_loss(q, fakes, {0}, 1.0, (SeqScorer<double>*)nullptr),
                  DataError);
}

TEST_CASE("reward_signal: analytic values and monotonicity in D") {
  Rng rng(9);
  auto d = DiscriminatorNet<double>::create(5, 6, rng);
  d.net.head.W.setZero();
  d.net.head.b.setZero();
  FullTrajectory t = random_traj(rng, 6);
  CHECK(reward_signal(d, (const PosteriorNet<double>*)nullptr, t, -1, 1.0) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));

  auto q = PosteriorNet<double>::create(5, 2, 6, rng);
  q.net.head.W.setZero();
  q.net.head.b.setZero();
  CHECK(reward_signal(d, &q, t, 0, 1.0) ==
        doctest::Approx(2 * std::log(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(reward_signal(d, &q, t, -1, 1.0), ConfigError);

  // Higher D score -> strictly higher reward.
  double last = -1e30;
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double z = std::log(p / (1 - p));
    auto dd = d;
    dd.net.head.b.setConstant(z);
    double r = reward_signal(dd, (const PosteriorNet<double>*)nullptr, t, -1, 1.0);
    CHECK(r > last);
    last = r;
  }
}

TEST_CASE("mutual-information lower bound never exceeds H(c)") {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    Rng net_rng(rng.next_u64());
    int k = trial % 2 == 0 ? 2 : 3;
    auto q = PosteriorNet<double>::create(5, k, 6, net_rng);
    std::vector<FullTrajectory> fakes;
    std::vector<int> codes;
    for (int i = 0; i < 4; ++i) {
      fakes.push_back(random_traj(rng, 6));
      codes.push_back(static_cast<int>(rng.uniform_int(k)));
    }
    CHECK(mi_lower_bound(q, fakes, codes) <= std::log(double(k)) + 1e-9);
  }

  // Uniform posterior at zero head: bound is exactly zero.
  Rng r11(11);
  auto q = PosteriorNet<double>::create(5, 3, 6, r11);
  q.net.head.W.setZero();
  q.net.head.b.setZero();
  std::vector<FullTrajectory> fakes{random_traj(r11, 6)};
  CHECK(mi_lower_bound(q, fakes, {1}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("losses stay finite for saturated networks") {
  Rng rng(12);
  auto d = DiscriminatorNet<double>::create(5, 6, rng);
  d.net.head.W.setConstant(1e3);
  d.net.head.b.setConstant(1e3);
  std::vector<FullTrajectory> reals{random_traj(rng, 6)};
  std::vector<FullTrajectory> fakes{random_traj(rng, 6)};
  auto stats = d_loss(d, reals, fakes, (SeqScorer<double>*)nullptr);
  CHECK(std::isfinite(double(stats.loss)));

  auto q = PosteriorNet<double>::create(5, 2, 6, rng);
  q.net.head.W.setConstant(-1e3);
  q.net.head.b(0) = 1e3;
  CHECK(std::isfinite(q_loss(q, fakes, {1}, 1.0, (SeqScorer<double>*)nullptr)));
}

TEST_CASE("d_loss and q_loss gradients match finite differences") {
  Rng rng(13);
  for (int draw = 0; draw < 8; ++draw) {
    Rng net_rng(rng.next_u64());
    auto d = DiscriminatorNet<double>::create(4, 5, net_rng);
    std::vector<FullTrajectory> reals{random_traj(rng, 5), random_traj(rng, 5)};
    std::vector<FullTrajectory> fakes{random_traj(rng, 5), random_traj(rng, 5)};

    SeqScorer<double> grad = d.net.zeros_like();
    d_loss(d, reals, fakes, &grad);
    VecXd analytic = grad.to_vector();

    auto work = d;
    VecXd numeric = fd_gradient(
        [&](const VecXd& th) {
          work.net.from_vector(th);
          return double(
              d_loss(work, reals, fakes, (SeqScorer<double>*)nullptr).loss);
        },
        d.net.to_vector(), 1e-5);
    CHECK(max_rel_err(analytic, numeric) < 1e-4);
  }

  for (int draw = 0; draw < 8; ++draw) {
    Rng net_rng(rng.next_u64());
    auto q = PosteriorNet<double>::create(4, 3, 5, net_rng);
    std::vector<FullTrajectory> fakes{random_traj(rng, 5), random_traj(rng, 5)};
    std::vector<int> codes{2, 0};

    SeqScorer<double> grad = q.net.zeros_like();
    q_loss(q, fakes, codes, 0.7, &grad);
    VecXd analytic = grad.to_vector();

    auto work = q;
    VecXd numeric = fd_gradient(
        [&](const VecXd& th) {
          work.net.from_vector(th);
          return q_loss(work, fakes, codes, 0.7, (SeqScorer<double>*)nullptr);
        },
        q.net.to_vector(), 1e-5);
    CHECK(max_rel_err(analytic, numeric) < 1e-4);
  }
}
