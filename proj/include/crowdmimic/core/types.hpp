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

#include <Eigen/Core>

namespace crowdmimic {

template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using VecXd = VecX<double>;
using MatXd = MatX<double>;
using Vec2d = Vec2<double>;

/// Observed window length fixed by the artifact.
inline constexpr int kObservedLen = 9;
/// Predicted window length fixed by the artifact.
inline constexpr int kFutureLen = 8;

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace crowdmimic
