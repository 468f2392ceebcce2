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
#include <unordered_map>
#include <utility>
#include <vector>

#include "crowdmimic/core/types.hpp"

namespace crowdmimic {

/// Named-tensor checkpoint container. Binary layout: magic "CMCK",
/// format version, tensor count, then per tensor the name, shape and raw
/// little-endian doubles. Save/load round-trips are bit-exact.
class TensorStore {
 public:
  void put(const std::string& name, const MatXd& m);
  void put_scalar(const std::string& name, double v);

  const MatXd& get(const std::string& name) const;
  double scalar(const std::string& name) const;
  bool has(const std::string& name) const;

  /// Insertion-ordered tensor names.
  std::vector<std::string> names() const;

  void save(const std::string& path) const;
  static TensorStore load(const std::string& path);

 private:
  std::vector<std::pair<std::string, MatXd>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace crowdmimic
