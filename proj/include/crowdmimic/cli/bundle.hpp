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

#include "crowdmimic/adversary/nets.hpp"
#include "crowdmimic/policy/policy_net.hpp"

namespace crowdmimic {

/// Everything one training run persists: the policy plus, when trained
/// adversarially, the discriminator and posterior, under distinct named
/// sections of one checkpoint container. Round-trips are bit-exact.
template <class Scalar>
struct NetBundle {
  PolicyNet<Scalar> policy;
  bool has_d = false;
  DiscriminatorNet<Scalar> d;
  bool has_q = false;
  PosteriorNet<Scalar> q;
  bool gate = true;
  bool vicinity = true;
  int t1 = kObservedLen;
  int t2 = kFutureLen;

  void save(const std::string& path) const {
    TensorStore store;
    store.put_scalar("meta.gate", gate ? 1 : 0);
    store.put_scalar("meta.vicinity", vicinity ? 1 : 0);
    store.put_scalar("meta.t1", t1);
    store.put_scalar("meta.t2", t2);
    store.put_scalar("meta.has_d", has_d ? 1 : 0);
    store.put_scalar("meta.has_q", has_q ? 1 : 0);
    policy.to_store(store, "policy.");
    if (has_d) d.net.to_store(store, "disc.");
    if (has_q) {
      store.put_scalar("post.code_dim", q.code_dim);
      q.net.to_store(store, "post.");
    }
    store.save(path);
  }

  static NetBundle load(const std::string& path) {
    TensorStore store = TensorStore::load(path);
    NetBundle b;
    b.gate = store.scalar("meta.gate") != 0;
    b.vicinity = store.scalar("meta.vicinity") != 0;
    b.t1 = static_cast<int>(store.scalar("meta.t1"));
    b.t2 = static_cast<int>(store.scalar("meta.t2"));
    b.has_d = store.scalar("meta.has_d") != 0;
    b.has_q = store.scalar("meta.has_q") != 0;
    b.policy = PolicyNet<Scalar>::from_store(store, "policy.");
    if (b.has_d) b.d.net = SeqScorer<Scalar>::from_store(store, "disc.");
    if (b.has_q) {
      b.q.code_dim = static_cast<int>(store.scalar("post.code_dim"));
      b.q.net = SeqScorer<Scalar>::from_store(store, "post.");
    }
    return b;
  }
};

}  // namespace crowdmimic
