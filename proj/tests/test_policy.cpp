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
#include <limits>

#include "crowdmimic/policy/ops.hpp"
#include "crowdmimic/policy/rollout.hpp"
#include "crowdmimic/trajdata/frame_batch.hpp"
#include "testutil.hpp"

using namespace crowdmimic;
using cmtest::fd_gradient;
using cmtest::max_rel_err;
using cmtest::straight_episode;
using cmtest::tiny_scene;

namespace {

PolicyNet<double> tiny_net(std::uint64_t seed, int code_dim = 0,
                           int vic_cells = 2) {
  Rng rng(seed);
  return PolicyNet<double>::create(8, 5, code_dim, vic_cells, -4.0, rng);
}

FrameBatch two_agent_batch(const SceneSpec& scene, int t1, int t2, double gap_y,
                           long long t0_b = 0, double x_stagger = 0.0) {
  std::vector<Episode> eps;
  eps.push_back(straight_episode(0.50, t1, t2, 0));
  eps.push_back(straight_episode(0.50 + gap_y, t1, t2, t0_b, 0.04, x_stagger));
  auto batches = make_frame_batches(eps, scene, 8);
  REQUIRE(batches.size() == 1);
  return batches.front();
}


// FD-safe configuration check: sampled candidates clear of the gate
// threshold and vicinity offsets clear of every cell boundary, so a 1e-5
// parameter perturbation cannot flip a discrete decision.
bool fd_stable(const BatchTape<double>& tape, const SceneSpec& scene) {
  const double cell = scene.vicinity_extent_px / scene.vicinity_cells;
  for (const auto& step : tape.dec) {
    const auto a = static_cast<Eigen::Index>(step.active.size());
    // ReLU kinks: pre-activations too close to zero break central
    // differences.
    if (step.FcPre.cwiseAbs().minCoeff() < 2e-4) return false;
    for (Eigen::Index i = 0; i < a; ++i) {
      for (Eigen::Index j = i + 1; j < a; ++j) {
        Vec2d pi = scene.to_px(Vec2d(step.Sampled(0, i), step.Sampled(1, i)));
        Vec2d pj = scene.to_px(Vec2d(step.Sampled(0, j), step.Sampled(1, j)));
        if (std::abs((pi - pj).norm() - scene.collision_thresh_px) < 0.2)
          return false;
        Vec2d qi = scene.to_px(Vec2d(step.X(0, i), step.X(1, i)));
        Vec2d qj = scene.to_px(Vec2d(step.X(0, j), step.X(1, j)));
        for (const Vec2d& off : {Vec2d(qj - qi), Vec2d(qi - qj)}) {
          for (double v : {off.x(), off.y()}) {
            double shifted = v + scene.vicinity_extent_px / 2;
            double frac = shifted - cell * std::floor(shifted / cell);
            if (std::min(frac, cell - frac) < 0.05) return false;
          }
        }
      }
    }
  }
  return true;
}

double sum_of_means(const PolicyNet<double>& net, const FrameBatch& batch,
                    const SceneSpec& scene, const std::vector<int>& codes,
                    const RolloutOptions& opts) {
  auto rolls = rollout_batch(net, batch, scene, codes, opts, nullptr,
                             (BatchTape<double>*)nullptr);
  double s = 0;
  for (const auto& r : rolls)
    for (const Vec2d& m : r.means) s += m.x() + m.y();
  return s;
}

}  // namespace

TEST_CASE("encode: zero net maps any input to the zero state") {
  PolicyNet<double> net = tiny_net(1);
  net.enc = LstmCell<double>::zeros(2, net.hidden);
  auto state = encode(net, {Vec2d(0.3, 0.4), Vec2d(0.5, 0.6)});
  CHECK(state.h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode: order sensitive and deterministic") {
  PolicyNet<double> net = tiny_net(2);
  std::vector<Vec2d> obs{Vec2d(0.1, 0.2), Vec2d(0.8, 0.9), Vec2d(0.4, 0.4)};
  std::vector<Vec2d> swapped{obs[1], obs[0], obs[2]};
  auto a = encode(net, obs);
  auto b = encode(net, swapped);
  auto c = encode(net, obs);
  CHECK((a.h - b.h).cwiseAbs().maxCoeff() > 1e-12);
  CHECK((a.h - c.h).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(
      encode(net, {Vec2d(std::nan(""), 0.0)}), NumericError);
}

TEST_CASE("inject_code: additive embedding semantics") {
  PolicyNet<double> net = tiny_net(3, /*code_dim=*/3);
  VecXd act = VecXd::LinSpaced(net.fc_width, 0.0, 1.0);

  SUBCASE("zero map is the identity") {
    net.code_embed.W.setZero();
    net.code_embed.b.setZero();
    VecXd out = inject_code(net, LatentCode{3, 1}, act);
    CHECK((out - act).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two codes differ by the embedding column difference") {
    VecXd o0 = inject_code(net, LatentCode{3, 0}, act);
    VecXd o2 = inject_code(net, LatentCode{3, 2}, act);
    VecXd expect = net.code_embed.W.col(0) - net.code_embed.W.col(2);
    CHECK(((o0 - o2) - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("one-hot extracts the matching column") {
    net.code_embed.b.setZero();
    VecXd out = inject_code(net, LatentCode{3, 2}, act);
    CHECK(((out - act) - net.code_embed.W.col(2)).cwiseAbs().maxCoeff() <
          1e-15);
  }
  SUBCASE("dimension mismatch is a configuration error") {
    CHECK_THROWS_AS(inject_code(net, LatentCode{2, 0}, act), ConfigError);
  }
}

TEST_CASE("vicinity_tensor: summation, emptiness and half-open cells") {
  SceneSpec scene = tiny_scene(5.0, 2, 40.0);
  PolicyNet<double> net = tiny_net(4);
  const int h = net.hidden;
  std::vector<VecXd> hiddens(3);
  Rng rng(11);
  for (auto& v : hiddens) {
    v.resize(h);
    for (int i = 0; i < h; ++i) v(i) = rng.uniform(-1, 1);
  }

  SUBCASE("empty neighborhood gives the zero tensor") {
    std::vector<Vec2d> pos{Vec2d(50, 50), Vec2d(50 + 100, 50), Vec2d(50, 200)};
    VecXd vt = vicinity_tensor(0, pos, hiddens, scene);
    CHECK(vt.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two neighbors in one cell accumulate by summation") {
    std::vector<Vec2d> pos{Vec2d(50, 50), Vec2d(55, 55), Vec2d(56, 56)};
    VecXd vt = vicinity_tensor(0, pos, hiddens, scene);
    int cx, cy;
    REQUIRE(vicinity_cell_of(Vec2d(5, 5), 2, 40.0, cx, cy));
    VecXd cell = vt.segment(vicinity_cell_index(cx, cy, 2) * h, h);
    CHECK((cell - (hiddens[1] + hiddens[2])).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("boundary: +extent/2 excluded, -extent/2 included") {
    int cx, cy;
    CHECK_FALSE(vicinity_cell_of(Vec2d(20.0, 0.0), 2, 40.0, cx, cy));
    CHECK(vicinity_cell_of(Vec2d(19.999, 0.0), 2, 40.0, cx, cy));
    CHECK(vicinity_cell_of(Vec2d(-20.0, 0.0), 2, 40.0, cx, cy));
    CHECK(cx == 0);
  }
  SUBCASE("matches a brute-force cell assignment oracle") {
    Rng r2(77);
    for (int trial = 0; trial < 200; ++trial) {
      Vec2d off(r2.uniform(-25, 25), r2.uniform(-25, 25));
      int cx, cy;
      bool in = vicinity_cell_of(off, 2, 40.0, cx, cy);
      // Oracle: explicit half-open interval per cell.
      bool found = false;
      for (int oy = 0; oy < 2 && !found; ++oy)
        for (int ox = 0; ox < 2 && !found; ++ox) {
          double lo_x = -20.0 + 20.0 * ox, lo_y = -20.0 + 20.0 * oy;
          if (off.x() >= lo_x && off.x() < lo_x + 20.0 && off.y() >= lo_y &&
              off.y() < lo_y + 20.0) {
            found = true;
            CHECK(in);
            if (in) {
              CHECK(cx == ox);
              CHECK(cy == oy);
            }
          }
        }
      if (!found) CHECK_FALSE(in);
    }
  }
}

TEST_CASE("decode_step: optional features reduce to the plain step") {
  PolicyNet<double> net = tiny_net(5, /*code_dim=*/0, /*vic_cells=*/2);
  RecurrentState<double> state{VecXd::Constant(net.hidden, 0.1),
                               VecXd::Constant(net.hidden, -0.05)};
  Vec2d prev(0.4, 0.5);

  auto [mean_plain, s_plain] = decode_step(net, prev, state, (const LatentCode*)nullptr, (const VecXd*)nullptr);

  SUBCASE("zero vicinity tensor with zero-bias embedding changes nothing") {
    net.vic_embed.b.setZero();
    VecXd vt = VecXd::Zero(net.vicinity_flat_size());
    auto [mean_vt, s_vt] = decode_step(net, prev, state, (const LatentCode*)nullptr, &vt);
    CHECK((mean_vt - mean_plain).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s_vt.h - s_plain.h).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("bit-reproducible") {
    auto [mean_again, s_again] = decode_step(net, prev, state, (const LatentCode*)nullptr, (const VecXd*)nullptr);
    CHECK((mean_again - mean_plain).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s_again.c - s_plain.c).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sample_action: analytic density values") {
  Vec2<double> mean(0.3, -0.2);
  Vec2<double> log_std(0.0, 0.0);
  auto [a, lp] = sample_action(mean, log_std, (Rng*)nullptr);
  CHECK((a - mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lp == doctest::Approx(-std::log(2 * M_PI)).epsilon(1e-12));

  Vec2<double> one_sigma(mean.x() + 1.0, mean.y());
  CHECK(gaussian_log_prob(one_sigma, mean, log_std) ==
        doctest::Approx(-std::log(2 * M_PI) - 0.5).epsilon(1e-12));
}

TEST_CASE("sample_action: Monte-Carlo mean within 4 sigma / sqrt(n)") {
  Vec2<double> mean(0.25, 0.75);
  Vec2<double> log_std(-1.0, -2.0);
  Rng rng(123);
  const int n = 100000;
  Vec2d acc(0, 0);
  for (int i = 0; i < n; ++i) {
    auto [a, lp] = sample_action(mean, log_std, &rng);
    acc += Vec2d(a.x(), a.y());
  }
  acc /= n;
  for (int d = 0; d < 2; ++d) {
    double sigma = std::exp(log_std(d));
    CHECK(std::abs(acc(d) - mean(d)) < 4 * sigma / std::sqrt(double(n)));
  }
}

TEST_CASE("analytic log-density integrates to one on a grid") {
  Vec2<double> mean(0.0, 0.0);
  Vec2<double> log_std(std::log(0.7), std::log(1.3));
  const int n = 400;
  const double span = 8.0;  // +- span*sigma covers all mass at this accuracy
  double mass = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = (-span + 2 * span * (i + 0.5) / n) * 0.7;
      double y = (-span + 2 * span * (j + 0.5) / n) * 1.3;
      double lp = gaussian_log_prob(Vec2<double>(x, y), mean, log_std);
      mass += std::exp(lp) * (2 * span * 0.7 / n) * (2 * span * 1.3 / n);
    }
  CHECK(std::abs(mass - 1.0) < 1e-3);
}

TEST_CASE("collision_gate: pair rule, boundary and single agent") {
  SUBCASE("single agent passes through") {
    std::vector<Vec2d> cand{Vec2d(10, 10)}, prev{Vec2d(9, 9)}, out;
    std::vector<uint8_t> hit;
    collision_gate(cand, prev, 5.0, out, hit);
    CHECK(out[0] == cand[0]);
    CHECK(hit[0] == 0);
  }
  SUBCASE("close pair: both held at previous positions") {
    std::vector<Vec2d> cand{Vec2d(10, 10), Vec2d(11.32, 11.76)};
    std::vector<Vec2d> prev{Vec2d(5, 5), Vec2d(20, 20)}, out;
    std::vector<uint8_t> hit;
    REQUIRE((cand[0] - cand[1]).norm() == doctest::Approx(2.2).epsilon(1e-9));
    collision_gate(cand, prev, 5.0, out, hit);
    CHECK(hit[0] == 1);
    CHECK(hit[1] == 1);
    CHECK(out[0] == prev[0]);
    CHECK(out[1] == prev[1]);
  }
  SUBCASE("exactly at threshold passes (strict inequality)") {
    std::vector<Vec2d> cand{Vec2d(0, 0), Vec2d(5.0, 0)};
    std::vector<Vec2d> prev{Vec2d(1, 1), Vec2d(2, 2)}, out;
    std::vector<uint8_t> hit;
    collision_gate(cand, prev, 5.0, out, hit);
    CHECK(hit[0] == 0);
    CHECK(hit[1] == 0);
    CHECK(out[0] == cand[0]);
  }
}

TEST_CASE("gate safety property on randomized batches") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_int(16));
    std::vector<Vec2d> cand, prev;
    for (int i = 0; i < n; ++i) {
      cand.emplace_back(rng.uniform(0, 60), rng.uniform(0, 60));
      prev.emplace_back(rng.uniform(0, 60), rng.uniform(0, 60));
    }
    std::vector<Vec2d> out;
    std::vector<uint8_t> hit;
    collision_gate(cand, prev, 5.0, out, hit);
    for (int i = 0; i < n; ++i) {
      if (hit[i]) CHECK(out[i] == prev[i]);
      for (int j = i + 1; j < n; ++j)
        if (!hit[i] && !hit[j]) CHECK((out[i] - out[j]).norm() >= 5.0);
    }
  }
}

TEST_CASE("rollout: shape, determinism and batch independence") {
  SceneSpec scene = tiny_scene(0.5, 2, 40.0);
  const int t1 = 3, t2 = 2;
  FrameBatch batch = two_agent_batch(scene, t1, t2, 0.10);
  PolicyNet<double> net = tiny_net(21);

  RolloutOptions plain{/*stochastic=*/false, /*gate=*/false, /*vicinity=*/false};
  auto rolls = rollout_batch(net, batch, scene, {}, plain, nullptr,
                             (BatchTape<double>*)nullptr);
  REQUIRE(rolls.size() == 2);
  CHECK(rolls[0].actions.size() == t2);
  CHECK(rolls[0].log_probs.size() == t2);

  SUBCASE("without social layers each agent matches its singleton rollout") {
    for (int i = 0; i < 2; ++i) {
      std::vector<Episode> one{batch.episodes[i]};
      auto single = make_frame_batches(one, scene, 4);
      auto r1 = rollout_batch(net, single.front(), scene, {}, plain, nullptr,
                              (BatchTape<double>*)nullptr);
      for (int k = 0; k < t2; ++k)
        CHECK((r1[0].actions[k] - rolls[i].actions[k]).cwiseAbs().maxCoeff() ==
              0.0);
    }
  }
  SUBCASE("singleton batch: gate on equals gate off") {
    std::vector<Episode> one{batch.episodes[0]};
    auto single = make_frame_batches(one, scene, 4);
    RolloutOptions gated = plain;
    gated.gate = true;
    auto a = rollout_batch(net, single.front(), scene, {}, plain, nullptr,
                           (BatchTape<double>*)nullptr);
    auto b = rollout_batch(net, single.front(), scene, {}, gated, nullptr,
                           (BatchTape<double>*)nullptr);
    for (int k = 0; k < t2; ++k)
      CHECK((a[0].actions[k] - b[0].actions[k]).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("same seed gives identical stochastic rollouts") {
    RolloutOptions stoch{/*stochastic=*/true, true, true};
    Rng r1(5), r2(5);
    auto a = rollout_batch(net, batch, scene, {}, stoch, &r1,
                           (BatchTape<double>*)nullptr);
    auto b = rollout_batch(net, batch, scene, {}, stoch, &r2,
                           (BatchTape<double>*)nullptr);
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < t2; ++k) {
        CHECK((a[i].actions[k] - b[i].actions[k]).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a[i].log_probs[k] == b[i].log_probs[k]);
      }
  }
  SUBCASE("gate hit implies the agent holds its previous position") {
    SceneSpec wide = tiny_scene(30.0, 2, 40.0);  // everything collides
    RolloutOptions gated{/*stochastic=*/false, /*gate=*/true, false};
    BatchTape<double> tape;
    auto r = rollout_batch(net, batch, wide, {}, gated, nullptr, &tape);
    bool any_hit = false;
    for (const auto& roll : r) {
      Vec2d prev = batch.episodes[roll.episode].observed.back();
      for (int k = 0; k < t2; ++k) {
        if (roll.gate_hits[k]) {
          any_hit = true;
          CHECK((roll.actions[k] - prev).cwiseAbs().maxCoeff() == 0.0);
        }
        prev = roll.actions[k];
      }
    }
    CHECK(any_hit);
  }
  SUBCASE("divergence is reported with the offending step") {
    PolicyNet<double> bad = net;
    bad.fc_out.W.setConstant(std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(rollout_batch(bad, batch, scene, {}, plain, nullptr,
                                  (BatchTape<double>*)nullptr),
                    NumericError);
  }
}

TEST_CASE("rollout: code constancy and code effect") {
  SceneSpec scene = tiny_scene(0.5, 2, 40.0);
  FrameBatch batch = two_agent_batch(scene, 3, 2, 0.10);
  PolicyNet<double> net = tiny_net(31, /*code_dim=*/2);
  RolloutOptions opts{false, false, false};
  auto r0 = rollout_batch(net, batch, scene, {0, 0}, opts, nullptr,
                          (BatchTape<double>*)nullptr);
  auto r1 = rollout_batch(net, batch, scene, {1, 1}, opts, nullptr,
                          (BatchTape<double>*)nullptr);
  CHECK(r0[0].code == 0);
  CHECK(r1[0].code == 1);
  CHECK((r0[0].actions[0] - r1[0].actions[0]).cwiseAbs().maxCoeff() > 1e-12);
}

TEST_CASE("rollout gradients match finite differences (tiny nets, H=8)") {
  const int t1 = 3, t2 = 2;
  Rng seed_stream(2026);

  // Two geometric regimes: a small threshold where candidates pass the gate
  // and a large one where the pair is held; vicinity is active in both.
  struct Regime {
    double thresh;
    const char* name;
  };
  for (Regime regime : {Regime{0.5, "pass"}, Regime{30.0, "held"}}) {
    CAPTURE(regime.name);
    SceneSpec scene = tiny_scene(regime.thresh, 2, 60.0);
    FrameBatch batch = two_agent_batch(scene, t1, t2, 0.10, 0, 0.10);
    RolloutOptions opts{/*stochastic=*/false, /*gate=*/true, /*vicinity=*/true};
    std::vector<int> codes{0, 1};

    int checked = 0;
    for (int draw = 0; checked < 12; ++draw) {
      REQUIRE(draw < 40);
      PolicyNet<double> net =
          tiny_net(seed_stream.next_u64(), /*code_dim=*/2, /*vic_cells=*/2);

      // Keep clear of the gate threshold and the vicinity cell boundaries
      // so the finite differences cannot flip a discrete decision.
      BatchTape<double> tape;
      auto rolls = rollout_batch(net, batch, scene, codes, opts, nullptr, &tape);
      if (!fd_stable(tape, scene)) continue;
      ++checked;

      std::vector<MatXd> dMean(tape.dec.size());
      for (std::size_t s = 0; s < tape.dec.size(); ++s)
        dMean[s] = MatXd::Ones(2, tape.dec[s].active.size());
      PolicyNet<double> grad = net.zeros_like();
      rollout_backward(net, tape, &dMean, (const std::vector<MatXd>*)nullptr, /*through_dynamics=*/true,
                       grad);
      VecXd analytic = grad.to_vector();

      VecXd theta = net.to_vector();
      PolicyNet<double> work = net;
      VecXd numeric = fd_gradient(
          [&](const VecXd& th) {
            work.from_vector(th);
            return sum_of_means(work, batch, scene, codes, opts);
          },
          theta, 1e-5);
      CHECK(max_rel_err(analytic, numeric) < 1e-4);
    }
  }
}

TEST_CASE("replay reproduces rollout means bit-exactly") {
  SceneSpec scene = tiny_scene(0.5, 2, 60.0);
  FrameBatch batch = two_agent_batch(scene, 3, 2, 0.10, /*t0_b=*/1);
  PolicyNet<double> net = tiny_net(77, 2);
  RolloutOptions opts{/*stochastic=*/true, true, true};
  Rng rng(9);
  BatchTape<double> tape;
  rollout_batch(net, batch, scene, {1, 0}, opts, &rng, &tape);
  std::vector<MatXd> old_means;
  for (const auto& s : tape.dec) old_means.push_back(s.Mean);
  replay_forward(net, tape);
  for (std::size_t s = 0; s < tape.dec.size(); ++s)
    CHECK((tape.dec[s].Mean - old_means[s]).cwiseAbs().maxCoeff() == 0.0);
}
