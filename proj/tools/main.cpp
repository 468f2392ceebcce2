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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "crowdmimic/cli/bundle.hpp"
#include "crowdmimic/cli/run_config.hpp"
#include "crowdmimic/eval/render.hpp"
#include "crowdmimic/eval/sweep.hpp"
#include "crowdmimic/optim/training.hpp"
#include "crowdmimic/trajdata/synth.hpp"

namespace fs = std::filesystem;
using namespace crowdmimic;

namespace {

using Real = double;

struct SynthArgs {
  std::string scene_path;
  int agents = 40;
  int steps = 400;
  std::uint64_t seed = 1;
  std::string out_path;
  double speed_min = 8.0, speed_max = 16.0;
  double gap_mean = 2.0;
  double deflect_deg = 15.0;
  std::vector<std::string> flows;
};

struct DataArgs {
  std::string data_path;
  std::string scene_path;
  double src_fps = 2.0, fps = 2.0;
  int stride = kObservedLen + kFutureLen;
  std::vector<double> split{0.8, 0.1, 0.1};
  int max_batch = 16;
  std::string split_tag = "test";
};

struct TrainArgs {
  std::string config_path;
  std::string mode;
  std::string data_path;
  std::string out_dir;
};

struct ToolArgs {
  std::string checkpoint;
  std::string out_path;
  int codes = 0;
  int code = 0;
  std::string baseline;
  int max_episodes = 8;
  int gate_override = -1;      // -1: use checkpoint meta
  int vicinity_override = -1;
};

Split parse_split_tag(const std::string& tag) {
  if (tag == "train") return Split::Train;
  if (tag == "val") return Split::Val;
  if (tag == "test") return Split::Test;
  throw ConfigError("unknown split: " + tag + " (train|val|test)");
}

SynthParams synth_params_from(const SynthArgs& a) {
  SynthParams p;
  p.speed_min_px = a.speed_min;
  p.speed_max_px = a.speed_max;
  p.spawn_gap_mean = a.gap_mean;
  p.deflect_deg = a.deflect_deg;
  for (const std::string& f : a.flows) {
    FlowSpec flow;
    if (std::sscanf(f.c_str(), "%d:%d:%lf", &flow.spawn_exit, &flow.goal_exit,
                    &flow.weight) < 2)
      throw ConfigError("bad --flow, expected spawn:goal[:weight], got " + f);
    p.flows.push_back(flow);
  }
  return p;
}

Dataset load_dataset(const DataArgs& a) {
  SceneSpec scene = load_scene(a.scene_path);
  auto tracklets = load_tracklets(a.data_path, scene);
  DataPipelineOptions opts;
  opts.src_fps = a.src_fps;
  opts.dst_fps = a.fps;
  opts.stride = a.stride;
  if (a.split.size() != 3) throw ConfigError("--split needs 3 fractions");
  opts.split_train = a.split[0];
  opts.split_val = a.split[1];
  opts.split_test = a.split[2];
  opts.max_batch = a.max_batch;
  return build_dataset(tracklets, scene, opts);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path);
  out << content;
  if (!out) throw IoError("failed writing: " + path);
}

int cmd_synth(const SynthArgs& a) {
  SceneSpec scene = load_scene(a.scene_path);
  SynthParams params = synth_params_from(a);
  auto tracklets = synth_generate(scene, a.agents, a.steps, a.seed, params);
  save_tracklets_csv(a.out_path, tracklets, scene);

  Config manifest;
  manifest.set_str("synth.scene_file", fs::absolute(a.scene_path).string());
  manifest.set_num("synth.agents", a.agents);
  manifest.set_num("synth.steps", a.steps);
  manifest.set_num("synth.seed", static_cast<double>(a.seed));
  manifest.set_num("synth.speed_min", params.speed_min_px);
  manifest.set_num("synth.speed_max", params.speed_max_px);
  manifest.set_num("synth.gap_mean", params.spawn_gap_mean);
  manifest.set_num("synth.deflect_deg", params.deflect_deg);
  for (std::size_t i = 0; i < params.flows.size(); ++i)
    manifest.set_list("synth.flow." + std::to_string(i),
                      {double(params.flows[i].spawn_exit),
                       double(params.flows[i].goal_exit),
                       params.flows[i].weight});
  manifest.set_str("synth.out", fs::absolute(a.out_path).string());
  manifest.set_str("tool.version", kToolVersion);
  manifest.save(a.out_path + ".manifest");

  std::printf("wrote %zu tracklets to %s\n", tracklets.size(),
              a.out_path.c_str());
  return 0;
}

int cmd_ingest(const DataArgs& a, const std::string& out_path) {
  Dataset data = load_dataset(a);
  long long n_train = 0, n_val = 0, n_test = 0;
  for (const Episode& e : data.episodes) {
    if (e.split == Split::Train) ++n_train;
    if (e.split == Split::Val) ++n_val;
    if (e.split == Split::Test) ++n_test;
  }
  std::printf(
      "{\"episodes\": %zu, \"train\": %lld, \"val\": %lld, \"test\": %lld, "
      "\"train_batches\": %zu, \"val_batches\": %zu, \"test_batches\": %zu}\n",
      data.episodes.size(), n_train, n_val, n_test, data.train.size(),
      data.val.size(), data.test.size());
  if (!out_path.empty()) {
    SceneSpec scene = data.scene;
    auto tracklets = load_tracklets(a.data_path, scene);
    std::vector<Tracklet> resampled;
    for (const Tracklet& t : tracklets) {
      try {
        resampled.push_back(resample(t, a.src_fps, a.fps));
      } catch (const DataError&) {
      }
    }
    save_tracklets_csv(out_path, resampled, scene);
  }
  return 0;
}

int cmd_train(const TrainArgs& a) {
  Config file_cfg = Config::parse_file(a.config_path);
  RunConfig rc = RunConfig::from_config(file_cfg);
  if (!a.mode.empty()) rc.mode = a.mode;
  if (!a.data_path.empty()) rc.data_path = a.data_path;
  if (rc.mode.empty()) throw ConfigError("--mode required (not in config)");
  if (rc.data_path.empty()) throw ConfigError("--data required (not in config)");
  rc.out_dir = a.out_dir;
  rc.validate_mode(rc.mode);
  if (rc.scene_file.empty() && !file_cfg.has("scene_file"))
    throw ConfigError("config must name scene_file (or inline scene.*)");

  fs::create_directories(rc.out_dir);

  DataArgs da;
  da.data_path = rc.data_path;
  da.src_fps = rc.data.src_fps;
  da.fps = rc.data.dst_fps;
  da.stride = rc.data.stride;
  da.split = {rc.data.split_train, rc.data.split_val, rc.data.split_test};
  da.max_batch = rc.data.max_batch;
  auto tracklets = load_tracklets(rc.data_path, rc.scene);
  Dataset data = build_dataset(tracklets, rc.scene, rc.data);

  // Manifest goes to disk before any training starts.
  rc.data_path = fs::absolute(rc.data_path).string();
  if (!rc.scene_file.empty())
    rc.scene_file = fs::absolute(rc.scene_file).string();
  Config manifest;
  rc.to_config(manifest);
  manifest.save((fs::path(rc.out_dir) / "manifest.cfg").string());

  Rng root(rc.train.seed);
  Rng policy_rng = root.fork("policy-init");
  Rng d_rng = root.fork("D-init");
  Rng q_rng = root.fork("Q-init");

  NetBundle<Real> bundle;
  bundle.gate = rc.train.gate;
  bundle.vicinity = rc.train.vicinity;
  bundle.policy = PolicyNet<Real>::create(rc.net.hidden, rc.net.fc_width,
                                          rc.train.code_dim,
                                          rc.scene.vicinity_cells,
                                          Real(rc.net.log_std), policy_rng);
  const int full_len = kObservedLen + kFutureLen;
  if (rc.mode != "supervised") {
    bundle.has_d = true;
    bundle.d = DiscriminatorNet<Real>::create(rc.net.hidden, full_len, d_rng);
  }
  if (rc.mode == "sagail") {
    bundle.has_q = true;
    bundle.q = PosteriorNet<Real>::create(rc.net.hidden, rc.train.code_dim,
                                          full_len, q_rng);
  }

  std::string metrics = metrics_csv_header();
  metrics += '\n';
  TrainHooks hooks;
  hooks.on_row = [&](const MetricsRow& row) {
    metrics += metrics_csv_row(row);
    metrics += '\n';
    std::printf(
        "iter %lld d_loss %.4f d_acc %.3f reward %.4f mi %.4f val_ade %.2f "
        "kl %.5f %s\n",
        row.iter, row.d_loss, row.d_acc, row.mean_reward, row.mi_lower_bound,
        row.val_ade, row.kl, row.step_accepted ? "accepted" : "rejected");
    std::fflush(stdout);
  };
  hooks.save_checkpoint = [&](long long iter) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_%06lld.ckpt", iter);
    bundle.save((fs::path(rc.out_dir) / name).string());
  };

  TrainLog log;
  if (rc.mode == "supervised") {
    log = train_supervised(bundle.policy, data, rc.train, hooks);
  } else if (rc.mode == "gail") {
    log = train_gail(bundle.policy, bundle.d, data, rc.train, hooks);
  } else {
    log = train_sagail(bundle.policy, bundle.d, bundle.q, data, rc.train, hooks);
  }

  write_text((fs::path(rc.out_dir) / "metrics.csv").string(), metrics);
  bundle.save((fs::path(rc.out_dir) / "checkpoint_final.ckpt").string());
  std::printf("done: %zu iterations logged, outputs in %s\n", log.rows.size(),
              rc.out_dir.c_str());
  return 0;
}

RolloutOptions rollout_options(const NetBundle<Real>& bundle,
                               const ToolArgs& t) {
  RolloutOptions opts;
  opts.stochastic = false;
  opts.gate = t.gate_override < 0 ? bundle.gate : t.gate_override != 0;
  opts.vicinity =
      t.vicinity_override < 0 ? bundle.vicinity : t.vicinity_override != 0;
  return opts;
}

int cmd_predict(const DataArgs& da, const ToolArgs& ta) {
  Dataset data = load_dataset(da);
  NetBundle<Real> bundle = NetBundle<Real>::load(ta.checkpoint);
  RolloutOptions opts = rollout_options(bundle, ta);
  const auto& batches = data.batches(parse_split_tag(da.split_tag));

  std::string csv = "episode_id,step,x_px,y_px\n";
  char buf[128];
  for (const FrameBatch& batch : batches) {
    std::vector<int> codes;
    if (bundle.policy.code_dim > 0)
      codes.assign(static_cast<std::size_t>(batch.size()), ta.code);
    auto rolls = rollout_batch(bundle.policy, batch, data.scene, codes, opts,
                               nullptr, (BatchTape<Real>*)nullptr);
    for (const RolloutResult& r : rolls) {
      const Episode& e = batch.episodes[static_cast<std::size_t>(r.episode)];
      for (std::size_t k = 0; k < r.actions.size(); ++k) {
        Vec2d px = data.scene.to_px(r.actions[k]);
        std::snprintf(buf, sizeof(buf), "%lld_%lld,%zu,%.4f,%.4f\n",
                      e.tracklet_id, e.t0, k, px.x(), px.y());
        csv += buf;
      }
    }
  }
  write_text(ta.out_path, csv);
  std::printf("wrote predictions to %s\n", ta.out_path.c_str());
  return 0;
}

int cmd_eval(const DataArgs& da, const ToolArgs& ta) {
  Dataset data = load_dataset(da);
  const auto& batches = data.batches(parse_split_tag(da.split_tag));

  MetricReport rep;
  if (ta.baseline == "constant-velocity") {
    rep = evaluate_constant_velocity(batches, data.scene);
  } else if (!ta.baseline.empty()) {
    throw ConfigError("unknown --baseline: " + ta.baseline);
  } else {
    if (ta.checkpoint.empty())
      throw ConfigError("eval needs --checkpoint or --baseline");
    NetBundle<Real> bundle = NetBundle<Real>::load(ta.checkpoint);
    RolloutOptions opts = rollout_options(bundle, ta);
    int code = bundle.policy.code_dim > 0 ? ta.code : -1;
    rep = evaluate_policy(bundle.policy, batches, data.scene, opts, code, 2);
  }
  std::string json = rep.to_json();
  std::printf("%s\n", json.c_str());
  if (!ta.out_path.empty()) write_text(ta.out_path, json + "\n");
  return 0;
}

int cmd_sweep(const DataArgs& da, const ToolArgs& ta) {
  Dataset data = load_dataset(da);
  NetBundle<Real> bundle = NetBundle<Real>::load(ta.checkpoint);
  RolloutOptions opts = rollout_options(bundle, ta);
  const auto& batches = data.batches(parse_split_tag(da.split_tag));
  IntentSweep sweep =
      intention_sweep(bundle.policy, batches, data.scene, ta.codes, opts, 2);
  write_text(ta.out_path, sweep.to_csv());
  std::printf(
      "{\"codes\": %d, \"majority_code\": %d, \"alignment_accuracy\": %.6f, "
      "\"max_endpoint_separation_px\": %.4f}\n",
      sweep.code_dim, sweep.majority_code, sweep.alignment_accuracy,
      sweep.max_endpoint_separation_px);
  return 0;
}

int cmd_render(const DataArgs& da, const ToolArgs& ta) {
  Dataset data = load_dataset(da);
  NetBundle<Real> bundle = NetBundle<Real>::load(ta.checkpoint);
  RolloutOptions opts = rollout_options(bundle, ta);
  const auto& batches = data.batches(parse_split_tag(da.split_tag));

  int codes = ta.codes > 0 ? ta.codes : std::max(bundle.policy.code_dim, 1);
  if (bundle.policy.code_dim == 0) codes = 1;

  std::vector<RenderEpisode> episodes;
  for (const FrameBatch& batch : batches) {
    std::vector<std::vector<RolloutResult>> per_code;
    for (int k = 0; k < codes; ++k) {
      std::vector<int> code_vec;
      if (bundle.policy.code_dim > 0)
        code_vec.assign(static_cast<std::size_t>(batch.size()), k);
      per_code.push_back(rollout_batch(bundle.policy, batch, data.scene,
                                       code_vec, opts, nullptr,
                                       (BatchTape<Real>*)nullptr));
    }
    for (int i = 0; i < batch.size(); ++i) {
      if (static_cast<int>(episodes.size()) >= ta.max_episodes) break;
      const Episode& e = batch.episodes[static_cast<std::size_t>(i)];
      RenderEpisode re;
      re.observed = e.observed;
      re.ground_truth = e.future;
      re.ground_truth.insert(re.ground_truth.begin(), e.observed.back());
      for (int k = 0; k < codes; ++k) {
        std::vector<Vec2d> fut = per_code[static_cast<std::size_t>(k)]
                                     [static_cast<std::size_t>(i)]
                                         .actions;
        fut.insert(fut.begin(), e.observed.back());
        re.code_futures.push_back(std::move(fut));
      }
      episodes.push_back(std::move(re));
    }
    if (static_cast<int>(episodes.size()) >= ta.max_episodes) break;
  }
  render_scene(data.scene, episodes, ta.out_path);
  std::printf("rendered %zu episodes to %s\n", episodes.size(),
              ta.out_path.c_str());
  return 0;
}

void add_data_flags(CLI::App* cmd, DataArgs& da, bool with_split_tag = true) {
  cmd->add_option("--data", da.data_path, "tracklet CSV file")
      ->required()
      ->capture_default_str();
  cmd->add_option("--scene", da.scene_path, "scene config file")
      ->required()
      ->capture_default_str();
  cmd->add_option("--src-fps", da.src_fps, "source frame rate")
      ->capture_default_str();
  cmd->add_option("--fps", da.fps, "resampled frame rate")
      ->capture_default_str();
  cmd->add_option("--stride", da.stride, "window stride in samples")
      ->capture_default_str();
  cmd->add_option("--split-fractions", da.split,
                  "train,val,test fractions")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--max-batch", da.max_batch, "frame batch size cap")
      ->capture_default_str();
  if (with_split_tag)
    cmd->add_option("--split", da.split_tag, "split to use (train|val|test)")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdmimic: imitation-learned pedestrian trajectory "
               "forecasting on tracklet data"};
  app.require_subcommand(1);

  SynthArgs sa;
  CLI::App* synth =
      app.add_subcommand("synth", "generate synthetic expert tracklets");
  synth->add_option("--scene", sa.scene_path, "scene config file")->required();
  synth->add_option("--agents", sa.agents, "number of agents")
      ->capture_default_str();
  synth->add_option("--steps", sa.steps, "simulation steps")
      ->capture_default_str();
  synth->add_option("--seed", sa.seed, "random seed")->capture_default_str();
  synth->add_option("--out", sa.out_path, "output tracklet CSV")->required();
  synth->add_option("--speed-min", sa.speed_min, "min speed, px per step")
      ->capture_default_str();
  synth->add_option("--speed-max", sa.speed_max, "max speed, px per step")
      ->capture_default_str();
  synth->add_option("--gap-mean", sa.gap_mean, "mean spawn gap in steps")
      ->capture_default_str();
  synth->add_option("--deflect-deg", sa.deflect_deg,
                    "avoidance deflection, degrees")
      ->capture_default_str();
  synth->add_option("--flow", sa.flows,
                    "restrict agents to spawn:goal[:weight] flows");

  DataArgs ia;
  std::string ingest_out;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "load, resample, window and split a tracklet file");
  add_data_flags(ingest, ia, /*with_split_tag=*/false);
  ingest->add_option("--out", ingest_out, "write resampled tracklets here");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "train a policy");
  train->add_option("--config", tr.config_path, "run config file")->required();
  train->add_option("--mode", tr.mode,
                    "training mode (supervised|gail|sagail)");
  train->add_option("--data", tr.data_path, "tracklet CSV file");
  train->add_option("--out", tr.out_dir, "output directory")->required();

  DataArgs pa;
  ToolArgs pt;
  CLI::App* predict =
      app.add_subcommand("predict", "roll out futures for a dataset");
  add_data_flags(predict, pa);
  predict->add_option("--checkpoint", pt.checkpoint, "checkpoint file")
      ->required();
  predict->add_option("--out", pt.out_path, "predictions CSV")->required();
  predict->add_option("--code", pt.code, "latent code for coded policies")
      ->capture_default_str();
  predict->add_option("--gate", pt.gate_override, "override gate (0|1)")
      ->capture_default_str();
  predict->add_option("--vicinity", pt.vicinity_override,
                      "override vicinity (0|1)")
      ->capture_default_str();

  DataArgs ea;
  ToolArgs et;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "displacement and collision metrics");
  add_data_flags(eval_cmd, ea);
  eval_cmd->add_option("--checkpoint", et.checkpoint, "checkpoint file");
  eval_cmd->add_option("--out", et.out_path, "metric report JSON file");
  eval_cmd->add_option("--baseline", et.baseline,
                       "evaluate a baseline instead (constant-velocity)");
  eval_cmd->add_option("--code", et.code, "latent code for coded policies")
      ->capture_default_str();
  eval_cmd->add_option("--gate", et.gate_override, "override gate (0|1)")
      ->capture_default_str();
  eval_cmd->add_option("--vicinity", et.vicinity_override,
                       "override vicinity (0|1)")
      ->capture_default_str();

  DataArgs wa;
  ToolArgs wt;
  CLI::App* sweep =
      app.add_subcommand("sweep", "iterate a coded policy over all codes");
  add_data_flags(sweep, wa);
  sweep->add_option("--checkpoint", wt.checkpoint, "checkpoint file")
      ->required();
  sweep->add_option("--codes", wt.codes, "code dimension")->required();
  sweep->add_option("--out", wt.out_path, "sweep CSV")->required();

  DataArgs ra;
  ToolArgs rt;
  CLI::App* render = app.add_subcommand("render", "render trajectories to SVG");
  add_data_flags(render, ra);
  render->add_option("--checkpoint", rt.checkpoint, "checkpoint file")
      ->required();
  render->add_option("--out", rt.out_path, "output SVG file")->required();
  render->add_option("--codes", rt.codes, "codes to draw (default: all)")
      ->capture_default_str();
  render->add_option("--max-episodes", rt.max_episodes, "episodes to draw")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "run with --help for usage\n");
    return 2;
  }

  try {
    if (*synth) return cmd_synth(sa);
    if (*ingest) return cmd_ingest(ia, ingest_out);
    if (*train) return cmd_train(tr);
    if (*predict) return cmd_predict(pa, pt);
    if (*eval_cmd) return cmd_eval(ea, et);
    if (*sweep) return cmd_sweep(wa, wt);
    if (*render) return cmd_render(ra, rt);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return 4;
  }
  return 0;
}
