// Copyright 2026 The MTNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mtnet/checkpoint.hpp"
#include "mtnet/config.hpp"
#include "mtnet/data.hpp"
#include "mtnet/evaluation.hpp"
#include "mtnet/model.hpp"
#include "mtnet/postprocess.hpp"
#include "mtnet/trainer.hpp"
#include "mtnet/viz.hpp"

namespace fs = std::filesystem;
using namespace mtnet;

namespace {

std::string resolve_data_root(const std::string& flag,
                              const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  const char* env = std::getenv("MTNET_DATA_ROOT");
  if (env && *env) return env;
  throw std::runtime_error(
      "no dataset root: pass --data, set data_root in the config file, or "
      "export MTNET_DATA_ROOT");
}

// split manifests + full sample list -> (train samples, val samples)
std::pair<std::vector<Sample>, std::vector<Sample>> partition_by_split(
    std::vector<Sample> samples, const std::string& root) {
  auto [train_ids, val_ids] = read_split(root);
  std::map<std::string, Sample> by_id;
  for (auto& s : samples) by_id.emplace(s.id, std::move(s));
  auto pick = [&](const std::vector<std::string>& ids,
                  const std::string& which) {
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw std::runtime_error("split " + which + " lists id '" + id +
                                 "' which is not in the dataset");
      out.push_back(std::move(it->second));
      by_id.erase(it);
    }
    return out;
  };
  auto train = pick(train_ids, "train.txt");
  auto val = pick(val_ids, "val.txt");
  return {std::move(train), std::move(val)};
}

int cmd_prepare_data(const std::string& data_flag, const std::string& out_flag,
                     uint64_t seed, double train_fraction) {
  const std::string root = resolve_data_root(data_flag, "");
  const std::string out = out_flag.empty() ? root : out_flag;
  std::vector<Sample> samples = load_dataset(root);
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.id);
  auto [train_ids, val_ids] = split_dataset(ids, train_fraction, seed);
  fs::create_directories(out);
  write_annotations(samples, out);
  write_split(out, train_ids, val_ids);
  std::cout << "prepared " << samples.size() << " images: " << train_ids.size()
            << " train, " << val_ids.size() << " val\n";
  std::cout << "wrote " << out << "/annotations.json and " << out
            << "/splits/{train,val}.txt\n";
  return 0;
}

int cmd_synth(const std::string& out, const SynthConfig& synth,
              double train_fraction) {
  std::vector<Sample> samples = synth_generate(synth);
  save_dataset(samples, out);
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.id);
  auto [train_ids, val_ids] = split_dataset(ids, train_fraction, synth.seed);
  write_split(out, train_ids, val_ids);
  std::cout << "generated " << samples.size() << " synthetic images in " << out
            << " (" << train_ids.size() << " train, " << val_ids.size()
            << " val)\n";
  return 0;
}

int cmd_train(Config cfg, const std::string& data_flag,
              const std::string& pretrained) {
  cfg.data_root = resolve_data_root(data_flag, cfg.data_root);
  cfg.validate();
  auto [train_set, val_set] =
      partition_by_split(load_dataset(cfg.data_root), cfg.data_root);
  Trainer trainer(cfg, std::move(train_set), std::move(val_set), pretrained);
  std::cout << "training mode " << mode_name(cfg.model.mode) << ", "
            << trainer.model().param_count() << " parameters, run dir "
            << cfg.run_dir << "\n";
  const RunRecord run = trainer.train();
  std::cout << "finished " << run.epochs.size() << " epochs\n";
  if (run.best_epoch > 0)
    std::cout << "best checkpoint: " << run.best_checkpoint << " ("
              << (trainer.model().has_det ? "AP50 " : "mIoU ")
              << run.best_metric * 100.0 << " at epoch " << run.best_epoch
              << ")\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& split,
             const std::string& out, const std::string& data_flag) {
  if (split != "train" && split != "val")
    throw std::runtime_error("--split must be 'train' or 'val', got '" +
                             split + "'");
  const Config ck_cfg = read_checkpoint_config(checkpoint);
  const std::string root = resolve_data_root(data_flag, ck_cfg.data_root);

  std::vector<Sample> all = load_dataset(root);
  std::map<std::string, int> coco_ids;  // id order matches annotations.json
  for (size_t i = 0; i < all.size(); ++i) coco_ids[all[i].id] = (int)i + 1;
  auto [train_set, val_set] = partition_by_split(std::move(all), root);
  const std::vector<Sample>& subset = split == "train" ? train_set : val_set;

  EvalArtifacts artifacts;
  TaskMode mode;
  const MetricsReport report =
      evaluate_checkpoint(checkpoint, subset, &mode, &artifacts);

  fs::create_directories(out);
  write_metrics_json(report, out + "/metrics.json");
  std::cout << metrics_table(report);

  if (report.has_detection) {
    const PrCurve curve = precision_recall_curve(
        artifacts.detections, artifacts.ground_truths, 0.5);
    write_pr_curve_svg(out + "/pr_curve.svg", curve);
    std::vector<int> ids;
    ids.reserve(artifacts.resized.size());
    for (const auto& s : artifacts.resized) ids.push_back(coco_ids.at(s.id));
    write_coco_results(artifacts.detections, ids, out + "/results.json");
  }

  fs::create_directories(out + "/overlays");
  static const std::vector<uint8_t> kNoMask;
  static const std::vector<Detection> kNoDets;
  for (size_t i = 0; i < artifacts.resized.size(); ++i) {
    const Sample& s = artifacts.resized[i];
    const auto& mask =
        report.has_segmentation ? artifacts.pred_masks[i] : kNoMask;
    const auto& dets =
        report.has_detection ? artifacts.detections[i] : kNoDets;
    write_overlay_png(out + "/overlays/" + s.id + ".png", s.image, 0, mask,
                      dets);
  }
  std::cout << "wrote " << out << "/metrics.json and "
            << artifacts.resized.size() << " overlays (mode "
            << mode_name(mode) << ")\n";
  return 0;
}

int cmd_bench(const std::string& checkpoint, int n, int size) {
  if (n <= 0) throw std::runtime_error("--n must be positive");
  const Config cfg = read_checkpoint_config(checkpoint);
  Model model(cfg.model);
  model.init(0);
  nn::StateList state;
  model.collect_state(state);
  load_checkpoint(checkpoint, state);
  model.set_training(false);

  std::mt19937 rng(12345);
  const int pool_size = std::min(n, 8);
  std::vector<Tensor> pool;
  pool.reserve(pool_size);
  for (int i = 0; i < pool_size; ++i)
    pool.push_back(rand_uniform(1, cfg.model.in_channels, size, size, rng));

  for (int i = 0; i < n; ++i) model.forward(pool[i % pool_size]);

  std::vector<double> ms(n);
  for (int i = 0; i < n; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    model.forward(pool[i % pool_size]);
    const auto t1 = std::chrono::steady_clock::now();
    ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / n;
  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  const double median = n % 2 ? sorted[n / 2]
                              : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  std::cout << "mode         " << mode_name(cfg.model.mode) << "\n";
  std::cout << "images       " << n << " (after " << n << " warm-up)\n";
  std::cout << "image size   " << size << "x" << size << "\n";
  std::cout << "mean         " << mean << " ms\n";
  std::cout << "median       " << median << " ms\n";
  std::cout << "throughput   " << (mean > 0 ? 1000.0 / mean : 0.0)
            << " images/s\n";
  std::cout << "parameters   " << model.param_count() << "\n";
  std::cout << "note: absolute timings depend on the host hardware\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task UNet for infrared small-target detection"};
  app.require_subcommand(1);

  std::string data_flag, out_flag, config_path, pretrained, mode_flag;
  std::string checkpoint, split = "val", eval_out = "eval_out";
  uint64_t seed = 0;
  bool seed_set = false;
  double train_fraction = 0.7;

  auto* prep = app.add_subcommand(
      "prepare-data", "derive boxes, COCO annotations, and split manifests");
  prep->add_option("--data", data_flag, "dataset root (or MTNET_DATA_ROOT)");
  prep->add_option("--out", out_flag, "output root (default: dataset root)");
  prep->add_option("--seed", seed, "split shuffle seed");
  prep->add_option("--train-fraction", train_fraction,
                   "fraction of images in the train split");

  SynthConfig synth;
  std::string synth_out = "data/synth";
  auto* syn = app.add_subcommand("synth", "generate a synthetic dataset");
  syn->add_option("--out", synth_out, "output dataset directory");
  syn->add_option("--count", synth.count, "number of images");
  syn->add_option("--size", synth.image_size, "square image size");
  syn->add_option("--seed", synth.seed, "generator seed");
  syn->add_option("--min-targets", synth.min_targets, "min targets per image");
  syn->add_option("--max-targets", synth.max_targets, "max targets per image");
  syn->add_option("--sigma-min", synth.sigma_min, "min target sigma (px)");
  syn->add_option("--sigma-max", synth.sigma_max, "max target sigma (px)");
  syn->add_option("--noise", synth.noise_level, "pixel noise level");
  syn->add_option("--train-fraction", train_fraction,
                  "fraction of images in the train split");

  auto* trn = app.add_subcommand("train", "train a model");
  trn->add_option("--config", config_path, "JSON config file (strict keys)");
  trn->add_option("--mode", mode_flag, "seg | det | multitask");
  trn->add_option("--pretrained", pretrained, "backbone checkpoint to load");
  trn->add_option("--seed", seed, "training seed")
      ->each([&](const std::string&) { seed_set = true; });
  trn->add_option("--data", data_flag, "dataset root (or MTNET_DATA_ROOT)");
  std::string run_dir_flag;
  trn->add_option("--run-dir", run_dir_flag, "run artifact directory");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  ev->add_option("--split", split, "train | val");
  ev->add_option("--out", eval_out, "output directory");
  ev->add_option("--data", data_flag, "dataset root (or MTNET_DATA_ROOT)");

  int bench_n = 2000, bench_size = 320;
  auto* bn = app.add_subcommand("bench", "single-image inference timing");
  bn->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  bn->add_option("--n", bench_n, "timed iterations (equal warm-up first)");
  bn->add_option("--size", bench_size, "square input size");

  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (prep->parsed())
      return cmd_prepare_data(data_flag, out_flag, seed, train_fraction);
    if (syn->parsed()) return cmd_synth(synth_out, synth, train_fraction);
    if (trn->parsed()) {
      Config cfg;
      if (!config_path.empty()) cfg = load_config_file(config_path);
      if (!mode_flag.empty()) cfg.model.mode = parse_mode(mode_flag);
      if (seed_set) cfg.train.seed = seed;
      if (!run_dir_flag.empty()) cfg.run_dir = run_dir_flag;
      return cmd_train(std::move(cfg), data_flag, pretrained);
    }
    if (ev->parsed()) return cmd_eval(checkpoint, split, eval_out, data_flag);
    if (bn->parsed()) return cmd_bench(checkpoint, bench_n, bench_size);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::string line = msg;
    std::replace(line.begin(), line.end(), '\n', ';');
    std::cerr << "error: " << cmd << ": " << line << "\n";
    if (msg.find('\n') != std::string::npos) std::cerr << msg << "\n";
    return 1;
  }
  return 0;
}
