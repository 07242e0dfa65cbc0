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
#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace mtnet {

enum class TaskMode { kSegOnly, kDetOnly, kMultitask };

TaskMode parse_mode(const std::string& s);
std::string mode_name(TaskMode m);

enum class UpsampleKind { kInterp, kDeconv };

struct ModelConfig {
  int in_channels = 1;
  int depth = 4;
  int base_width = 64;
  int feature_channels = 64;
  UpsampleKind upsample = UpsampleKind::kInterp;
  int head_width = 64;        // detection branch hidden channels
  int psp_bin_channels = 16;  // per-bin channels in the pyramid pooling head
  bool predict_offset = false;
  TaskMode mode = TaskMode::kMultitask;

  // loss constants
  float focal_alpha = 2.0f;
  float focal_beta = 4.0f;
  float lambda_size = 0.1f;
  float min_overlap = 0.7f;  // gaussian radius rule
  float dice_smooth = 1.0f;
  float seg_weight_target = 10.0f;
  float seg_weight_background = 0.1f;
  float lambda_det = 3.0f;
  float lambda_seg = 1.0f;

  void validate() const;
};

struct PostprocessConfig {
  int top_k = 100;
  float score_threshold = 0.25f;
  float mask_threshold = 0.5f;  // binarization of segmentation probabilities
};

struct TrainConfig {
  int epochs = 200;
  float lr = 0.001f;
  float momentum = 0.9f;
  float weight_decay = 0.05f;
  float lr_gamma = 0.98f;  // per-epoch exponential decay
  int batch_size = 4;
  int image_size = 320;  // resize target (square)
  int val_interval = 5;
  uint64_t seed = 0;
  bool augment = true;

  void validate() const;
};

struct SynthConfig {
  int count = 16;
  int image_size = 64;
  int min_targets = 1;
  int max_targets = 3;
  float sigma_min = 1.6f;
  float sigma_max = 2.6f;
  float noise_level = 0.02f;
  uint64_t seed = 0;

  void validate() const;
};

struct Config {
  ModelConfig model;
  TrainConfig train;
  PostprocessConfig postprocess;
  std::string data_root;  // dataset directory; MTNET_DATA_ROOT if empty
  std::string run_dir = "runs/default";

  void validate() const;
};

// Strict parsing: unknown keys anywhere in the document are an error, so a
// typo cannot silently fall back to a default.
Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& c);
Config load_config_file(const std::string& path);

}  // namespace mtnet
