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

#include "crowdmimic/core/rng.hpp"
#include "crowdmimic/core/types.hpp"

namespace crowdmimic {

/// Affine map y = W x + b, applied column-wise to batches.
template <class Scalar>
struct Dense {
  MatX<Scalar> W;
  VecX<Scalar> b;

  static Dense zeros(int out, int in) {
    Dense d;
    d.W = MatX<Scalar>::Zero(out, in);
    d.b = VecX<Scalar>::Zero(out);
    return d;
  }

  /// Uniform(-r, r) weights with r = 1/sqrt(fan_in), zero bias.
  static Dense init(int out, int in, Rng& rng) {
    Scalar r = in > 0 ? Scalar(1) / std::sqrt(Scalar(in)) : Scalar(0);
    return init_uniform(out, in, rng, double(r));
  }

  static Dense init_uniform(int out, int in, Rng& rng, double range) {
    Dense d = zeros(out, in);
    for (int j = 0; j < d.W.cols(); ++j)
      for (int i = 0; i < d.W.rows(); ++i)
        d.W(i, j) = Scalar(rng.uniform(-range, range));
    return d;
  }

  int out_size() const { return static_cast<int>(W.rows()); }
  int in_size() const { return static_cast<int>(W.cols()); }

  MatX<Scalar> forward(const MatX<Scalar>& x) const {
    return (W * x).colwise() + b;
  }

  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  MatX<Scalar> backward(const MatX<Scalar>& x, const MatX<Scalar>& dy,
                        Dense& grad) const {
    grad.W.noalias() += dy * x.transpose();
    grad.b.noalias() += dy.rowwise().sum();
    return W.transpose() * dy;
  }
};

template <class Scalar>
MatX<Scalar> relu(const MatX<Scalar>& x) {
  return x.cwiseMax(Scalar(0));
}

/// dL/dx for y = relu(x) given the pre-activation x.
template <class Scalar>
MatX<Scalar> relu_backward(const MatX<Scalar>& pre, const MatX<Scalar>& dy) {
  return (pre.array() > Scalar(0)).template cast<Scalar>() * dy.array();
}

}  // namespace crowdmimic
