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

#include <memory>

#include "mtnet/backbone.hpp"
#include "mtnet/detection.hpp"
#include "mtnet/segmentation.hpp"

namespace mtnet {

struct ModelOutputs {
  DetectionOutputs det;
  Tensor seg_probs;  // N x 1 x H x W
  bool has_det = false;
  bool has_seg = false;
};

struct TotalLossReport {
  double l_det = 0.0;
  double l_seg = 0.0;
  double l_all = 0.0;
};

// weighted sum of the task losses; absent tasks contribute zero
TotalLossReport total_loss(const DetLossReport* det, const SegLossReport* seg,
                           double lambda_det, double lambda_seg);

// Shared-backbone multi-task model. The backbone runs exactly once per
// forward; both heads read the same feature map.
struct Model {
  ModelConfig cfg;
  Backbone backbone;
  DetectionHead det_head;
  SegmentationHead seg_head;
  bool has_det = false;
  bool has_seg = false;
  int64_t backbone_invocations = 0;  // test hook: one per forward

  explicit Model(const ModelConfig& cfg);
  void init(uint64_t seed);
  void set_training(bool t);
  ModelOutputs forward(const Tensor& images);
  // pass null gradients for inactive heads; returns grad w.r.t. the images
  Tensor backward(const Tensor* gheatmap, const Tensor* gsize,
                  const Tensor* gseg_probs);
  void collect_params(nn::ParamList& out);
  void collect_state(nn::StateList& out);
  int64_t param_count();
  void zero_grad();
};

}  // namespace mtnet
