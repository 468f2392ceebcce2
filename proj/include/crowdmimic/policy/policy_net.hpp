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
#include <utility>
#include <vector>

#include "crowdmimic/core/error.hpp"
#include "crowdmimic/core/rng.hpp"
#include "crowdmimic/core/tensor_store.hpp"
#include "crowdmimic/core/types.hpp"
#include "crowdmimic/nn/dense.hpp"
#include "crowdmimic/nn/lstm.hpp"

namespace crowdmimic {

/// One-hot latent intention code drawn from the uniform categorical prior.
struct LatentCode {
  int dim = 0;
  int index = 0;

  VecXd onehot() const {
    VecXd v = VecXd::Zero(dim);
    v(index) = 1.0;
    return v;
  }
  static LatentCode sample(int dim, Rng& rng) {
    return LatentCode{dim, static_cast<int>(rng.uniform_int(dim))};
  }
};

/// Encoder-decoder stochastic policy. The encoder summarizes the observed
/// window; the decoder generates future positions auto-regressively with
/// optional latent-code injection into its fully-connected hidden layer and
/// an optional vicinity embedding added to its recurrent state. Actions are
/// Gaussian around the decoded mean with a fixed log standard deviation
/// (`log_std` is not a trainable parameter).
template <class Scalar>
struct PolicyNet {
  LstmCell<Scalar> enc;       // input 2
  LstmCell<Scalar> dec;       // input 2
  Dense<Scalar> fc_hidden;    // H -> F, ReLU
  Dense<Scalar> fc_out;       // F -> 2
  Dense<Scalar> code_embed;   // K -> F (empty when K = 0)
  Dense<Scalar> vic_embed;    // N*N*H -> H
  Vec2<Scalar> log_std{Scalar(-4), Scalar(-4)};

  int hidden = 0;
  int fc_width = 0;
  int code_dim = 0;
  int vicinity_cells = 0;

  static PolicyNet create(int hidden, int fc_width, int code_dim,
                          int vicinity_cells, Scalar log_std_value, Rng& rng) {
    PolicyNet net;
    net.hidden = hidden;
    net.fc_width = fc_width;
    net.code_dim = code_dim;
    net.vicinity_cells = vicinity_cells;
    net.log_std.setConstant(log_std_value);
    Rng r_enc = rng.fork("enc");
    Rng r_dec = rng.fork("dec");
    Rng r_fc = rng.fork("fc");
    net.enc = LstmCell<Scalar>::init(2, hidden, r_enc);
    net.dec = LstmCell<Scalar>::init(2, hidden, r_dec);
    net.fc_hidden = Dense<Scalar>::init(fc_width, hidden, r_fc);
    net.fc_out = Dense<Scalar>::init(2, fc_width, r_fc);
    // The code embedding perturbs a small-scale activation; it starts small
    // and only breaks the symmetry between codes.
    net.code_embed = Dense<Scalar>::init_uniform(fc_width, code_dim, r_fc, 0.05);
    net.vic_embed = Dense<Scalar>::init(
        hidden, vicinity_cells * vicinity_cells * hidden, r_fc);
    return net;
  }

  /// Same shapes, all parameters zero (gradient accumulator).
  PolicyNet zeros_like() const {
    PolicyNet g = *this;
    g.enc.W.setZero();
    g.enc.b.setZero();
    g.dec.W.setZero();
    g.dec.b.setZero();
    g.fc_hidden.W.setZero();
    g.fc_hidden.b.setZero();
    g.fc_out.W.setZero();
    g.fc_out.b.setZero();
    g.code_embed.W.setZero();
    g.code_embed.b.setZero();
    g.vic_embed.W.setZero();
    g.vic_embed.b.setZero();
    return g;
  }

  int vicinity_flat_size() const {
    return vicinity_cells * vicinity_cells * hidden;
  }

  /// Trainable tensors in a fixed order; log_std is deliberately excluded.
  std::vector<std::pair<std::string, MatX<Scalar>*>> tensors() {
    return {
        {"enc.W", &enc.W},
        {"dec.W", &dec.W},
        {"fc_hidden.W", &fc_hidden.W},
        {"fc_out.W", &fc_out.W},
        {"code_embed.W", &code_embed.W},
        {"vic_embed.W", &vic_embed.W},
    };
  }
  std::vector<std::pair<std::string, VecX<Scalar>*>> bias_tensors() {
    return {
        {"enc.b", &enc.b},
        {"dec.b", &dec.b},
        {"fc_hidden.b", &fc_hidden.b},
        {"fc_out.b", &fc_out.b},
        {"code_embed.b", &code_embed.b},
        {"vic_embed.b", &vic_embed.b},
    };
  }

  long long param_count() const {
    long long n = 0;
    auto self = const_cast<PolicyNet*>(this);
    for (auto& [name, m] : self->tensors()) n += m->size();
    for (auto& [name, v] : self->bias_tensors()) n += v->size();
    return n;
  }

  VecX<Scalar> to_vector() const {
    auto self = const_cast<PolicyNet*>(this);
    VecX<Scalar> out(param_count());
    long long at = 0;
    for (auto& [name, m] : self->tensors()) {
      out.segment(at, m->size()) =
          Eigen::Map<const VecX<Scalar>>(m->data(), m->size());
      at += m->size();
    }
    for (auto& [name, v] : self->bias_tensors()) {
      out.segment(at, v->size()) = *v;
      at += v->size();
    }
    return out;
  }

  void from_vector(const VecX<Scalar>& flat) {
    if (flat.size() != param_count())
      throw ConfigError("policy parameter vector has wrong length");
    long long at = 0;
    for (auto& [name, m] : tensors()) {
      Eigen::Map<VecX<Scalar>>(m->data(), m->size()) =
          flat.segment(at, m->size());
      at += m->size();
    }
    for (auto& [name, v] : bias_tensors()) {
      *v = flat.segment(at, v->size());
      at += v->size();
    }
  }

  void add_scaled(const PolicyNet& other, Scalar a) {
    enc.W += a * other.enc.W;
    enc.b += a * other.enc.b;
    dec.W += a * other.dec.W;
    dec.b += a * other.dec.b;
    fc_hidden.W += a * other.fc_hidden.W;
    fc_hidden.b += a * other.fc_hidden.b;
    fc_out.W += a * other.fc_out.W;
    fc_out.b += a * other.fc_out.b;
    code_embed.W += a * other.code_embed.W;
    code_embed.b += a * other.code_embed.b;
    vic_embed.W += a * other.vic_embed.W;
    vic_embed.b += a * other.vic_embed.b;
  }

  void to_store(TensorStore& store, const std::string& prefix) const {
    auto self = const_cast<PolicyNet*>(this);
    store.put_scalar(prefix + "hidden", hidden);
    store.put_scalar(prefix + "fc_width", fc_width);
    store.put_scalar(prefix + "code_dim", code_dim);
    store.put_scalar(prefix + "vicinity_cells", vicinity_cells);
    store.put(prefix + "log_std", log_std.template cast<double>());
    for (auto& [name, m] : self->tensors())
      store.put(prefix + name, m->template cast<double>());
    for (auto& [name, v] : self->bias_tensors())
      store.put(prefix + name, v->template cast<double>());
  }

  static PolicyNet from_store(const TensorStore& store,
                              const std::string& prefix) {
    PolicyNet net;
    net.hidden = static_cast<int>(store.scalar(prefix + "hidden"));
    net.fc_width = static_cast<int>(store.scalar(prefix + "fc_width"));
    net.code_dim = static_cast<int>(store.scalar(prefix + "code_dim"));
    net.vicinity_cells =
        static_cast<int>(store.scalar(prefix + "vicinity_cells"));
    net.log_std = store.get(prefix + "log_std").template cast<Scalar>();
    net.enc = LstmCell<Scalar>::zeros(2, net.hidden);
    net.dec = LstmCell<Scalar>::zeros(2, net.hidden);
    net.fc_hidden = Dense<Scalar>::zeros(net.fc_width, net.hidden);
    net.fc_out = Dense<Scalar>::zeros(2, net.fc_width);
    net.code_embed = Dense<Scalar>::zeros(net.fc_width, net.code_dim);
    net.vic_embed = Dense<Scalar>::zeros(net.hidden, net.vicinity_flat_size());
    for (auto& [name, m] : net.tensors()) {
      const MatXd& src = store.get(prefix + name);
      if (src.rows() != m->rows() || src.cols() != m->cols())
        throw ConfigError("checkpoint tensor shape mismatch: " + prefix + name);
      *m = src.template cast<Scalar>();
    }
    for (auto& [name, v] : net.bias_tensors()) {
      const MatXd& src = store.get(prefix + name);
      if (src.rows() != v->size() || src.cols() != 1)
        throw ConfigError("checkpoint tensor shape mismatch: " + prefix + name);
      *v = src.col(0).template cast<Scalar>();
    }
    return net;
  }
};

}  // namespace crowdmimic
