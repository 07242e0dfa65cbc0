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

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "mtnet/config.hpp"
#include "mtnet/data.hpp"
#include "mtnet/evaluation.hpp"
#include "mtnet/model.hpp"

namespace mtnet {

// SGD with momentum and coupled L2 weight decay on decay-flagged parameters:
//   v <- momentum*v + g + wd*w ;  w <- w - lr*v
struct SGD {
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 0.05;
  std::vector<Tensor> velocity;

  void attach(const nn::ParamList& params);
  void step(nn::ParamList& params);
};

struct EpochRecord {
  int epoch = 0;
  double l_k = 0, l_size = 0, l_det = 0, l_seg = 0, l_all = 0;
  double lr = 0;
  bool has_validation = false;
  MetricsReport validation;
  std::string checkpoint_path;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_metric = -1.0;
  std::string best_checkpoint;
  std::string source_rev;
};

// Per-image inference products, for overlays and plots.
struct EvalArtifacts {
  std::vector<Sample> resized;  // network-resolution inputs and ground truth
  std::vector<std::vector<Detection>> detections;        // det modes
  std::vector<std::vector<GroundTruthBox>> ground_truths;  // det modes
  std::vector<std::vector<uint8_t>> pred_masks;          // seg modes
};

// Inference + metrics over a split: deterministic resize, no augmentation,
// evaluation at network resolution. Metric families follow the model mode.
MetricsReport evaluate_model(Model& model, const std::vector<Sample>& split,
                             const PostprocessConfig& post, int image_size,
                             EvalArtifacts* artifacts = nullptr);

// Rebuilds the model a checkpoint was trained with (its config echo) and
// scores it on the split.
MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                  const std::vector<Sample>& split,
                                  TaskMode* mode_out = nullptr,
                                  EvalArtifacts* artifacts = nullptr);

class Trainer {
 public:
  // pretrained_backbone, when nonempty, initializes the backbone from that
  // checkpoint after fresh init (heads stay fresh, nothing frozen)
  Trainer(const Config& cfg, std::vector<Sample> train_set,
          std::vector<Sample> val_set,
          const std::string& pretrained_backbone = "");

  // One pass over the shuffled training set. Appends per-step lines to
  // log.jsonl when the run directory is open (full train() runs).
  EpochRecord run_epoch(int epoch);
  MetricsReport validate();

  // Full recipe: all epochs, periodic validation, checkpoints at validation
  // epochs and the end, best-checkpoint tracking, run-directory artifacts.
  RunRecord train();

  Model& model() { return *model_; }
  const Config& config() const { return cfg_; }
  double lr_for_epoch(int epoch) const;

 private:
  struct StepLosses {
    double l_k = 0, l_size = 0, l_det = 0, l_seg = 0, l_all = 0;
  };
  StepLosses train_step(const std::vector<int>& batch_indices, int epoch,
                        int step);
  Tensor assemble_batch(const std::vector<Sample>& samples);

  Config cfg_;
  std::vector<Sample> train_set_;
  std::vector<Sample> val_set_;
  std::unique_ptr<Model> model_;
  SGD opt_;
  nn::ParamList params_;
  std::unique_ptr<std::ofstream> log_;
};

}  // namespace mtnet
