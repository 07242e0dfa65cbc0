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

#include <vector>

#include "mtnet/config.hpp"
#include "mtnet/data_types.hpp"
#include "mtnet/nn.hpp"

namespace mtnet {

struct DetectionOutputs {
  Tensor heatmap;  // N x 1 x H x W, sigmoid probabilities
  Tensor size;     // N x 2 x H x W, channel 0 = width, channel 1 = height
  Tensor offset;   // N x 2 x H x W when the offset branch is configured
  bool has_offset = false;
};

struct Keypoint {
  int x = 0, y = 0;        // heatmap peak pixel (floored box center)
  float w = 0.0f, h = 0.0f;  // box size in pixels
  float off_x = 0.0f, off_y = 0.0f;  // residual; identically 0 at full scale
};

struct DetectionTargets {
  Tensor heatmap;  // 1 x 1 x H x W
  std::vector<Keypoint> keypoints;
};

struct DetLossReport {
  double l_k = 0.0;
  double l_size = 0.0;
  double l_det = 0.0;
  int n_keypoints = 0;
};

// Per-branch full-resolution prediction head: 3x3 conv + relu + 1x1 conv,
// sigmoid on the heatmap branch only.
struct DetectionHead {
  nn::ConvReLU hm_conv;
  nn::Conv2d hm_out;
  nn::Sigmoid hm_sigmoid;
  nn::ConvReLU size_conv;
  nn::Conv2d size_out;
  nn::ConvReLU off_conv;
  nn::Conv2d off_out;
  bool has_offset = false;

  DetectionHead() = default;
  DetectionHead(int feature_channels, int head_width, bool predict_offset);
  void init(std::mt19937& rng);
  void set_training(bool t);
  DetectionOutputs forward(const Tensor& feature);
  // gradients arrive w.r.t. heatmap probabilities and the raw size map;
  // returns the gradient w.r.t. the shared feature map
  Tensor backward(const Tensor& gheatmap, const Tensor& gsize);
  void collect_params(const std::string& p, nn::ParamList& out);
  void collect_state(const std::string& p, nn::StateList& out);
  int64_t param_count();
};

// Size-adaptive Gaussian std: smallest corner-displacement radius keeping
// IoU >= min_overlap (three-case quadratic rule), divided by 3, floored at
// 0.6 so single-pixel targets keep kernel support.
double gaussian_radius_sigma(double box_w, double box_h, double min_overlap);

// max-merge a Gaussian kernel centered at (cx, cy) into plane (1x1xHxW view)
void draw_gaussian(Tensor& plane, int plane_n, int cx, int cy, double sigma);

// Boxes use inclusive pixel corners; the continuous center (x1+x2+1)/2 is
// floored to the keypoint pixel, size is the pixel extent.
DetectionTargets encode_targets(const std::vector<BoxAnnotation>& boxes, int h,
                                int w, float min_overlap);

// Pixelwise focal loss over one heatmap plane; n_keypoints = count of target pixels
// with value exactly 1. Loss is summed and divided by max(n_keypoints, 1).
// grad, when non-null, receives d loss / d pred.
double focal_loss(const Tensor& pred, const Tensor& target, float alpha,
                  float beta, Tensor* grad = nullptr);

// mean over keypoints of |pred(p_k) - s_k| summed over the two components
double size_loss(const Tensor& size_map, const std::vector<Keypoint>& kps,
                 Tensor* grad = nullptr);

// batch detection loss: mean of per-image losses, l_det = l_k + lambda_size *
// l_size computed in double precision
DetLossReport detection_loss(const DetectionOutputs& outputs,
                             const std::vector<DetectionTargets>& targets,
                             const ModelConfig& cfg, Tensor* gheatmap = nullptr,
                             Tensor* gsize = nullptr);

}  // namespace mtnet
