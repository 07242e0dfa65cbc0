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
#include "mtnet/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace mtnet {

using nlohmann::json;

TaskMode parse_mode(const std::string& s) {
  if (s == "seg" || s == "seg_only") return TaskMode::kSegOnly;
  if (s == "det" || s == "det_only") return TaskMode::kDetOnly;
  if (s == "multitask") return TaskMode::kMultitask;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (expected seg, det, or multitask)");
}

std::string mode_name(TaskMode m) {
  switch (m) {
    case TaskMode::kSegOnly:
      return "seg";
    case TaskMode::kDetOnly:
      return "det";
    default:
      return "multitask";
  }
}

void ModelConfig::validate() const {
  std::vector<std::string> errs;
  if (in_channels <= 0) errs.push_back("model.in_channels must be positive");
  if (depth <= 0) errs.push_back("model.depth must be positive");
  if (base_width <= 0) errs.push_back("model.base_width must be positive");
  if (feature_channels <= 0)
    errs.push_back("model.feature_channels must be positive");
  if (head_width <= 0) errs.push_back("model.head_width must be positive");
  if (psp_bin_channels <= 0)
    errs.push_back("model.psp_bin_channels must be positive");
  if (!(min_overlap > 0.0f && min_overlap < 1.0f))
    errs.push_back("model.min_overlap must be in (0,1)");
  if (dice_smooth <= 0.0f) errs.push_back("model.dice_smooth must be positive");
  if (!errs.empty()) {
    std::string msg = "invalid model config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

void TrainConfig::validate() const {
  std::vector<std::string> errs;
  if (epochs <= 0) errs.push_back("train.epochs must be positive");
  if (lr <= 0.0f) errs.push_back("train.lr must be positive");
  if (momentum < 0.0f) errs.push_back("train.momentum must be >= 0");
  if (weight_decay < 0.0f) errs.push_back("train.weight_decay must be >= 0");
  if (!(lr_gamma > 0.0f && lr_gamma <= 1.0f))
    errs.push_back("train.lr_gamma must be in (0,1]");
  if (batch_size <= 0) errs.push_back("train.batch_size must be positive");
  if (image_size <= 0) errs.push_back("train.image_size must be positive");
  if (val_interval <= 0) errs.push_back("train.val_interval must be positive");
  if (!errs.empty()) {
    std::string msg = "invalid train config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

void SynthConfig::validate() const {
  std::vector<std::string> errs;
  if (count <= 0) errs.push_back("synth.count must be positive");
  if (image_size <= 0) errs.push_back("synth.image_size must be positive");
  if (min_targets < 0) errs.push_back("synth.min_targets must be >= 0");
  if (max_targets < min_targets)
    errs.push_back("synth.max_targets must be >= min_targets");
  if (sigma_min <= 0.0f) errs.push_back("synth.sigma_min must be positive");
  if (sigma_max < sigma_min)
    errs.push_back("synth.sigma_max must be >= sigma_min");
  if (noise_level < 0.0f) errs.push_back("synth.noise_level must be >= 0");
  // a target needs 6 sigma of room plus margin to fit in the frame
  if (6.0f * sigma_max + 4.0f >= (float)image_size)
    errs.push_back("synth.image_size too small for sigma_max targets");
  if (!errs.empty()) {
    std::string msg = "invalid synth config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

void Config::validate() const {
  model.validate();
  train.validate();
  if (postprocess.top_k <= 0)
    throw std::invalid_argument("postprocess.top_k must be positive");
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown config key '" + where + it.key() +
                                  "'");
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config config_from_json(const json& j) {
  Config c;
  reject_unknown_keys(
      j, {"model", "train", "postprocess", "data_root", "run_dir"}, "");
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown_keys(
        m,
        {"in_channels", "depth", "base_width", "feature_channels", "upsample",
         "head_width", "psp_bin_channels", "predict_offset", "mode",
         "focal_alpha", "focal_beta", "lambda_size", "min_overlap",
         "dice_smooth", "seg_weight_target", "seg_weight_background",
         "lambda_det", "lambda_seg"},
        "model.");
    get_if(m, "in_channels", c.model.in_channels);
    get_if(m, "depth", c.model.depth);
    get_if(m, "base_width", c.model.base_width);
    get_if(m, "feature_channels", c.model.feature_channels);
    if (m.contains("upsample")) {
      const std::string u = m.at("upsample").get<std::string>();
      if (u == "interp")
        c.model.upsample = UpsampleKind::kInterp;
      else if (u == "deconv")
        c.model.upsample = UpsampleKind::kDeconv;
      else
        throw std::invalid_argument("model.upsample must be interp or deconv");
    }
    get_if(m, "head_width", c.model.head_width);
    get_if(m, "psp_bin_channels", c.model.psp_bin_channels);
    get_if(m, "predict_offset", c.model.predict_offset);
    if (m.contains("mode"))
      c.model.mode = parse_mode(m.at("mode").get<std::string>());
    get_if(m, "focal_alpha", c.model.focal_alpha);
    get_if(m, "focal_beta", c.model.focal_beta);
    get_if(m, "lambda_size", c.model.lambda_size);
    get_if(m, "min_overlap", c.model.min_overlap);
    get_if(m, "dice_smooth", c.model.dice_smooth);
    get_if(m, "seg_weight_target", c.model.seg_weight_target);
    get_if(m, "seg_weight_background", c.model.seg_weight_background);
    get_if(m, "lambda_det", c.model.lambda_det);
    get_if(m, "lambda_seg", c.model.lambda_seg);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown_keys(t,
                        {"epochs", "lr", "momentum", "weight_decay", "lr_gamma",
                         "batch_size", "image_size", "val_interval", "seed",
                         "augment"},
                        "train.");
    get_if(t, "epochs", c.train.epochs);
    get_if(t, "lr", c.train.lr);
    get_if(t, "momentum", c.train.momentum);
    get_if(t, "weight_decay", c.train.weight_decay);
    get_if(t, "lr_gamma", c.train.lr_gamma);
    get_if(t, "batch_size", c.train.batch_size);
    get_if(t, "image_size", c.train.image_size);
    get_if(t, "val_interval", c.train.val_interval);
    get_if(t, "seed", c.train.seed);
    get_if(t, "augment", c.train.augment);
  }
  if (j.contains("postprocess")) {
    const json& p = j.at("postprocess");
    reject_unknown_keys(p, {"top_k", "score_threshold", "mask_threshold"},
                        "postprocess.");
    get_if(p, "top_k", c.postprocess.top_k);
    get_if(p, "score_threshold", c.postprocess.score_threshold);
    get_if(p, "mask_threshold", c.postprocess.mask_threshold);
  }
  get_if(j, "data_root", c.data_root);
  get_if(j, "run_dir", c.run_dir);
  c.validate();
  return c;
}

json config_to_json(const Config& c) {
  json m = {
      {"in_channels", c.model.in_channels},
      {"depth", c.model.depth},
      {"base_width", c.model.base_width},
      {"feature_channels", c.model.feature_channels},
      {"upsample",
       c.model.upsample == UpsampleKind::kInterp ? "interp" : "deconv"},
      {"head_width", c.model.head_width},
      {"psp_bin_channels", c.model.psp_bin_channels},
      {"predict_offset", c.model.predict_offset},
      {"mode", mode_name(c.model.mode)},
      {"focal_alpha", c.model.focal_alpha},
      {"focal_beta", c.model.focal_beta},
      {"lambda_size", c.model.lambda_size},
      {"min_overlap", c.model.min_overlap},
      {"dice_smooth", c.model.dice_smooth},
      {"seg_weight_target", c.model.seg_weight_target},
      {"seg_weight_background", c.model.seg_weight_background},
      {"lambda_det", c.model.lambda_det},
      {"lambda_seg", c.model.lambda_seg},
  };
  json t = {
      {"epochs", c.train.epochs},
      {"lr", c.train.lr},
      {"momentum", c.train.momentum},
      {"weight_decay", c.train.weight_decay},
      {"lr_gamma", c.train.lr_gamma},
      {"batch_size", c.train.batch_size},
      {"image_size", c.train.image_size},
      {"val_interval", c.train.val_interval},
      {"seed", c.train.seed},
      {"augment", c.train.augment},
  };
  json p = {
      {"top_k", c.postprocess.top_k},
      {"score_threshold", c.postprocess.score_threshold},
      {"mask_threshold", c.postprocess.mask_threshold},
  };
  return json{{"model", m},
              {"train", t},
              {"postprocess", p},
              {"data_root", c.data_root},
              {"run_dir", c.run_dir}};
}

Config load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in '" + path +
                             "': " + e.what());
  }
  return config_from_json(j);
}

}  // namespace mtnet
