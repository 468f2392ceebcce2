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

#include "crowdmimic/core/types.hpp"

namespace crowdmimic {

/// Conjugate-gradient solve of A x = b for a symmetric positive-definite
/// operator given only through matrix-vector products. Stops after `iters`
/// iterations or when the residual norm falls below `tol`.
template <class Scalar>
VecX<Scalar> conjugate_gradient(
    const std::function<VecX<Scalar>(const VecX<Scalar>&)>& matvec,
    const VecX<Scalar>& b, int iters, Scalar tol = Scalar(1e-10)) {
  VecX<Scalar> x = VecX<Scalar>::Zero(b.size());
  VecX<Scalar> r = b;
  VecX<Scalar> p = b;
  Scalar rs = r.squaredNorm();
  for (int it = 0; it < iters; ++it) {
    if (std::sqrt(rs) < tol) break;
    VecX<Scalar> Ap = matvec(p);
    Scalar pAp = p.dot(Ap);
    if (!(pAp > 0)) break;  // lost positive-definiteness, keep current x
    Scalar alpha = rs / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    Scalar rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return x;
}

}  // namespace crowdmimic
