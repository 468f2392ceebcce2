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

#include "crowdmimic/cli/run_config.hpp"

#include <filesystem>

#include "crowdmimic/core/error.hpp"

namespace crowdmimic {

RunConfig RunConfig::from_config(const Config& cfg) {
  RunConfig rc;

  if (!cfg.keys_with_prefix("scene.").empty()) {
    rc.scene = scene_from_config(cfg, "scene.");
    rc.scene_file = cfg.str_or("scene_file", "");
  } else {
    rc.scene_file = cfg.str("scene_file");
    rc.scene = load_scene(rc.scene_file);
  }

  rc.data.src_fps = cfg.num_or("data.src_fps", 2.0);
  rc.data.dst_fps = cfg.num_or("data.fps", 2.0);
  rc.data.stride = cfg.int_or("data.stride", kObservedLen + kFutureLen);
  if (cfg.has("data.split")) {
    std::vector<double> split = cfg.list("data.split");
    if (split.size() != 3)
      throw ConfigError("data.split needs exactly 3 fractions");
    rc.data.split_train = split[0];
    rc.data.split_val = split[1];
    rc.data.split_test = split[2];
  }
  rc.data.max_batch = cfg.int_or("data.max_batch", 16);

  rc.train.iterations = cfg.int_or("train.iterations", 100);
  rc.train.episodes_per_iter = cfg.int_or("train.episodes_per_iter", 32);
  rc.train.lambda = cfg.num_or("train.lambda", 1.0);
  rc.train.code_dim = cfg.int_or("train.code_dim", 0);
  rc.train.gate = cfg.flag_or("train.gate", true);
  rc.train.vicinity = cfg.flag_or("train.vicinity", true);
  rc.train.seed = static_cast<std::uint64_t>(cfg.num_or("train.seed", 1));
  rc.train.checkpoint_every = cfg.int_or("train.checkpoint_every", 0);
  rc.train.d_lr = cfg.num_or("train.d_lr", 1e-3);
  rc.train.q_lr = cfg.num_or("train.q_lr", 1e-3);
  rc.train.epochs = cfg.int_or("train.epochs", 200);
  rc.train.lr = cfg.num_or("train.lr", 1e-2);
  rc.train.batch_episodes = cfg.int_or("train.batch_episodes", 32);
  rc.train.early_stop_patience = cfg.int_or("train.early_stop_patience", 0);
  rc.train.workers = cfg.int_or("train.workers", 2);

  rc.train.trpo.max_kl = cfg.num_or("trpo.max_kl", 0.01);
  rc.train.trpo.cg_iters = cfg.int_or("trpo.cg_iters", 10);
  rc.train.trpo.cg_damping = cfg.num_or("trpo.cg_damping", 0.1);
  rc.train.trpo.backtrack_ratio = cfg.num_or("trpo.backtrack_ratio", 0.8);
  rc.train.trpo.max_backtracks = cfg.int_or("trpo.max_backtracks", 10);

  rc.net.hidden = cfg.int_or("net.hidden", 128);
  rc.net.fc_width = cfg.int_or("net.fc_width", 64);
  rc.net.log_std = cfg.num_or("net.log_std", -4.0);

  rc.mode = cfg.str_or("run.mode", "");
  rc.data_path = cfg.str_or("run.data", "");
  rc.out_dir = cfg.str_or("run.out", "");
  if (cfg.has("tool.version")) cfg.str("tool.version");  // informational

  cfg.require_all_consumed();
  rc.train.validate();
  return rc;
}

RunConfig RunConfig::load(const std::string& path) {
  return from_config(Config::parse_file(path));
}

void RunConfig::to_config(Config& cfg) const {
  if (!scene_file.empty()) cfg.set_str("scene_file", scene_file);
  scene_to_config(scene, cfg, "scene.");

  cfg.set_num("data.src_fps", data.src_fps);
  cfg.set_num("data.fps", data.dst_fps);
  cfg.set_num("data.stride", data.stride);
  cfg.set_list("data.split", {data.split_train, data.split_val, data.split_test});
  cfg.set_num("data.max_batch", data.max_batch);

  cfg.set_num("train.iterations", train.iterations);
  cfg.set_num("train.episodes_per_iter", train.episodes_per_iter);
  cfg.set_num("train.lambda", train.lambda);
  cfg.set_num("train.code_dim", train.code_dim);
  cfg.set_num("train.gate", train.gate ? 1 : 0);
  cfg.set_num("train.vicinity", train.vicinity ? 1 : 0);
  cfg.set_num("train.seed", static_cast<double>(train.seed));
  cfg.set_num("train.checkpoint_every", train.checkpoint_every);
  cfg.set_num("train.d_lr", train.d_lr);
  cfg.set_num("train.q_lr", train.q_lr);
  cfg.set_num("train.epochs", train.epochs);
  cfg.set_num("train.lr", train.lr);
  cfg.set_num("train.batch_episodes", train.batch_episodes);
  cfg.set_num("train.early_stop_patience", train.early_stop_patience);
  cfg.set_num("train.workers", train.workers);

  cfg.set_num("trpo.max_kl", train.trpo.max_kl);
  cfg.set_num("trpo.cg_iters", train.trpo.cg_iters);
  cfg.set_num("trpo.cg_damping", train.trpo.cg_damping);
  cfg.set_num("trpo.backtrack_ratio", train.trpo.backtrack_ratio);
  cfg.set_num("trpo.max_backtracks", train.trpo.max_backtracks);

  cfg.set_num("net.hidden", net.hidden);
  cfg.set_num("net.fc_width", net.fc_width);
  cfg.set_num("net.log_std", net.log_std);

  if (!mode.empty()) cfg.set_str("run.mode", mode);
  if (!data_path.empty()) cfg.set_str("run.data", data_path);
  if (!out_dir.empty()) cfg.set_str("run.out", out_dir);
  cfg.set_str("tool.version", kToolVersion);
}

void RunConfig::validate_mode(const std::string& run_mode) const {
  if (run_mode == "supervised" || run_mode == "gail") {
    if (train.code_dim != 0)
      throw ConfigError("mode " + run_mode + " requires train.code_dim = 0");
  } else if (run_mode == "sagail") {
    if (train.code_dim != 2 && train.code_dim != 3)
      throw ConfigError("mode sagail requires train.code_dim of 2 or 3");
  } else {
    throw ConfigError("unknown mode: " + run_mode +
                      " (expected supervised, gail or sagail)");
  }
}

}  // namespace crowdmimic
