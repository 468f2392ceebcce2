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

#include <functional>
#include <string>
#include <utility>

#include "crowdmimic/core/error.hpp"
#include "crowdmimic/optim/cg.hpp"

namespace crowdmimic {

template <class Scalar>
struct TrustRegionConfig {
  Scalar max_kl = Scalar(0.01);
  int cg_iters = 10;
  Scalar cg_damping = Scalar(0.1);
  Scalar backtrack_ratio = Scalar(0.8);
  int max_backtracks = 10;
};

/// Problem hooks for the trust-region update. `surrogate_and_kl(theta)`
/// evaluates the probability-ratio surrogate (higher is better) and the mean
/// KL against the behavior parameters; `surrogate_grad0` is the surrogate
/// gradient at the behavior parameters and must be called before anything
/// perturbs cached state; `kl_grad(theta)` is the analytic mean-KL gradient.
template <class Scalar>
struct TrustRegionOps {
  std::function<std::pair<Scalar, Scalar>(const VecX<Scalar>&)> surrogate_and_kl;
  std::function<VecX<Scalar>()> surrogate_grad0;
  std::function<VecX<Scalar>(const VecX<Scalar>&)> kl_grad;
  /// True when kl_grad(theta0) is exactly zero (the usual case: the KL is
  /// measured against theta0 itself); enables one-sided differencing.
  bool kl_grad_zero_at_origin = true;
};

template <class Scalar>
struct TrustRegionReport {
  bool accepted = false;
  Scalar kl = 0;
  Scalar improvement = 0;
  Scalar step_scale = 0;
  int backtracks = 0;
  std::string reason;
};

/// Hessian-vector product of the mean KL at `theta0`, computed by
/// differencing the analytic KL gradient along v. One-sided differencing is
/// exact enough when the gradient vanishes at theta0 (KL measured against
/// theta0 itself); otherwise a central difference is used.
template <class Scalar>
VecX<Scalar> kl_hessian_vector_product(
    const std::function<VecX<Scalar>(const VecX<Scalar>&)>& kl_grad,
    const VecX<Scalar>& theta0, const VecX<Scalar>& v,
    bool grad_zero_at_origin, Scalar fd = Scalar(1e-6)) {
  Scalar n = v.norm();
  if (n == Scalar(0)) return VecX<Scalar>::Zero(v.size());
  VecX<Scalar> u = v / n;
  if (grad_zero_at_origin) return kl_grad(theta0 + fd * u) * (n / fd);
  VecX<Scalar> gp = kl_grad(theta0 + fd * u);
  VecX<Scalar> gm = kl_grad(theta0 - fd * u);
  return (gp - gm) * (n / (2 * fd));
}

/// One trust-region policy update: policy gradient, conjugate-gradient solve
/// of (F + damping I) x = g with Fisher-vector products taken as
/// Hessian-vector products of the mean KL, step scale sqrt(2 max_kl / xFx),
/// then a backtracking line search that accepts the first candidate with
/// positive surrogate improvement and KL within the bound. On rejection
/// `theta` is left untouched.
template <class Scalar>
TrustRegionReport<Scalar> trust_region_step(VecX<Scalar>& theta,
                                            const TrustRegionOps<Scalar>& ops,
                                            const TrustRegionConfig<Scalar>& cfg) {
  TrustRegionReport<Scalar> report;

  VecX<Scalar> g = ops.surrogate_grad0();
  if (!g.allFinite())
    throw NumericError("trust_region_step: non-finite policy gradient");
  if (g.norm() == Scalar(0)) {
    report.reason = "zero-gradient";
    return report;
  }

  const VecX<Scalar> theta0 = theta;
  auto hvp = [&](const VecX<Scalar>& v) -> VecX<Scalar> {
    return kl_hessian_vector_product<Scalar>(ops.kl_grad, theta0, v,
                                             ops.kl_grad_zero_at_origin);
  };

  auto damped = [&](const VecX<Scalar>& v) -> VecX<Scalar> {
    return hvp(v) + cfg.cg_damping * v;
  };
  VecX<Scalar> x =
      conjugate_gradient<Scalar>(damped, g, cfg.cg_iters);
  Scalar xFx = x.dot(hvp(x));
  if (!(xFx > 0) || !std::isfinite(double(xFx))) {
    report.reason = "non-positive curvature";
    return report;
  }
  Scalar beta = std::sqrt(2 * cfg.max_kl / xFx);
  report.step_scale = beta;

  Scalar s0 = ops.surrogate_and_kl(theta0).first;
  Scalar scale = beta;
  for (int k = 0; k < cfg.max_backtracks; ++k, scale *= cfg.backtrack_ratio) {
    VecX<Scalar> cand = theta0 + scale * x;
    auto [s, kl] = ops.surrogate_and_kl(cand);
    report.backtracks = k;
    if (!std::isfinite(double(s)) || !std::isfinite(double(kl))) continue;
    if (s - s0 > 0 && kl <= cfg.max_kl) {
      theta = cand;
      report.accepted = true;
      report.kl = kl;
      report.improvement = s - s0;
      report.step_scale = scale;
      report.reason = "accepted";
      return report;
    }
  }
  report.reason = "line-search exhausted";
  return report;
}

}  // namespace crowdmimic
