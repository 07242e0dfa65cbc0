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

#include <array>

#include "mtnet/config.hpp"
#include "mtnet/nn.hpp"

namespace mtnet {

struct SegLossReport {
  double dice_target = 0.0;
  double dice_background = 0.0;
  double l_seg = 0.0;
};

// Pyramid pooling head: adaptive average pools at 1x1, 2x2, 3x3 and 6x6,
// each reduced to psp_bin_channels by a 1x1 conv+bn+relu and bilinearly
// upsampled back, concatenated with the input feature map, fused by a 3x3
// conv block, projected to one channel and passed through a sigmoid.
struct SegmentationHead {
  static constexpr std::array<int, 4> kBins = {1, 2, 3, 6};
  std::array<nn::AdaptiveAvgPool, 4> pools;
  std::array<nn::ConvBNReLU, 4> bin_convs;  // 1x1, feature -> bin channels
  std::array<nn::BilinearResize, 4> bin_ups;
  nn::ConvBNReLU fuse;  // 3x3, feature + 4*bin -> feature
  nn::Conv2d out_conv;  // 1x1 -> 1, with bias
  nn::Sigmoid out_sigmoid;
  int feature_channels = 0;
  int bin_channels = 0;

  SegmentationHead() = default;
  SegmentationHead(int feature_channels, int psp_bin_channels);
  void init(std::mt19937& rng);
  void set_training(bool t);
  Tensor forward(const Tensor& feature);  // N x 1 x H x W probabilities
  // gradient w.r.t. probabilities in, gradient w.r.t. the feature map out
  Tensor backward(const Tensor& gprobs);
  void collect_params(const std::string& p, nn::ParamList& out);
  void collect_state(const std::string& p, nn::StateList& out);
  int64_t param_count();
};

// Smooth dice between a probability map and a binary mask (both 1-channel
// single images); sums run in double over all pixels.
double dice_smooth(const Tensor& pred, const std::vector<uint8_t>& truth,
                   double smooth, Tensor* grad = nullptr);

// weighted two-class dice loss; the background class is the complement of
// both the mask and the prediction
SegLossReport segmentation_loss(const Tensor& probs,
                                const std::vector<uint8_t>& mask,
                                const ModelConfig& cfg,
                                Tensor* gprobs = nullptr);

// batch mean of per-image segmentation losses; masks are h*w per image
SegLossReport segmentation_loss_batch(
    const Tensor& probs, const std::vector<const std::vector<uint8_t>*>& masks,
    const ModelConfig& cfg, Tensor* gprobs = nullptr);

}  // namespace mtnet
