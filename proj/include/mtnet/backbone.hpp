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
#include <vector>

#include "mtnet/config.hpp"
#include "mtnet/nn.hpp"

namespace mtnet {

// Two stacked 3x3 conv+bn+relu layers, the UNet stage block.
struct ConvBlock {
  nn::ConvBNReLU c1, c2;
  ConvBlock() = default;
  ConvBlock(int cin, int cout)
      : c1(cin, cout, 3, 1), c2(cout, cout, 3, 1) {}
  void init(std::mt19937& rng) {
    c1.init(rng);
    c2.init(rng);
  }
  void set_training(bool t) {
    c1.set_training(t);
    c2.set_training(t);
  }
  Tensor forward(const Tensor& x) { return c2.forward(c1.forward(x)); }
  Tensor backward(const Tensor& gy) { return c1.backward(c2.backward(gy)); }
  void collect_params(const std::string& p, nn::ParamList& out) {
    c1.collect_params(p + ".c1", out);
    c2.collect_params(p + ".c2", out);
  }
  void collect_state(const std::string& p, nn::StateList& out) {
    c1.collect_state(p + ".c1", out);
    c2.collect_state(p + ".c2", out);
  }
};

// Decoder 2x upsampling step: either a 1x1 conv + bilinear interpolation, or
// a kernel-2 stride-2 transposed convolution, both followed by bn + relu.
struct UpBlock {
  UpsampleKind kind = UpsampleKind::kInterp;
  nn::Conv2d conv;  // interp path (1x1)
  nn::ConvTranspose2x2 deconv;
  nn::BatchNorm2d bn;
  nn::BilinearResize resize;
  Tensor out_cache;
  bool training = true;

  UpBlock() = default;
  UpBlock(int cin, int cout, UpsampleKind kind);
  void init(std::mt19937& rng);
  void set_training(bool t);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(const std::string& p, nn::ParamList& out);
  void collect_state(const std::string& p, nn::StateList& out);
};

// UNet encoder-decoder. Spatial resolution is preserved end to end: depth
// pooling halvings mirrored by depth upsamplings, skip concatenation at each
// level, and a final 1x1 projection to feature_channels.
struct Backbone {
  int depth = 0;
  int in_channels = 0;
  int feature_channels = 0;
  std::vector<ConvBlock> stages;  // depth+1 blocks, widths base<<i
  std::vector<nn::MaxPool2x2> pools;
  std::vector<UpBlock> ups;       // ups[i]: width base<<(i+1) -> base<<i
  std::vector<ConvBlock> decs;    // decs[i]: 2*(base<<i) -> base<<i
  nn::ConvBNReLU proj;            // 1x1 base -> feature_channels
  std::vector<Tensor> skip_grads;

  explicit Backbone(const ModelConfig& cfg);
  void init(std::mt19937& rng);
  void set_training(bool t);
  // image H and W must be divisible by 2^depth
  Tensor forward(const Tensor& image);
  Tensor backward(const Tensor& gfeature);
  void collect_params(const std::string& p, nn::ParamList& out);
  void collect_state(const std::string& p, nn::StateList& out);
  int64_t param_count();
};

int64_t count_params(nn::ParamList& params);

}  // namespace mtnet
