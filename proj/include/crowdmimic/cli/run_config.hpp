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

#include "crowdmimic/core/config.hpp"
#include "crowdmimic/optim/training.hpp"
#include "crowdmimic/trajdata/pipeline.hpp"

namespace crowdmimic {

/// Network sizes for the policy and critics.
struct NetConfig {
  int hidden = 128;
  int fc_width = 64;
  double log_std = -4.0;
};

/// Everything a training run needs, resolvable from one config file.
/// A run's manifest is the same schema with every key resolved plus the
/// `run.*` entries, so re-running a manifest reproduces the run.
struct RunConfig {
  SceneSpec scene;
  std::string scene_file;  // absolute path recorded in manifests
  DataPipelineOptions data;
  TrainConfig train;
  NetConfig net;

  // Optional run identity (filled by the CLI, stored in manifests).
  std::string mode;
  std::string data_path;
  std::string out_dir;

  /// Parses the schema; unknown keys raise ConfigError. Scene comes from
  /// inline `scene.*` keys when present, else from `scene_file`.
  static RunConfig from_config(const Config& cfg);
  static RunConfig load(const std::string& path);

  /// Full resolved snapshot, including the scene.
  void to_config(Config& cfg) const;

  void validate_mode(const std::string& run_mode) const;
};

}  // namespace crowdmimic
