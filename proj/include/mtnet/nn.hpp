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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mtnet/tensor.hpp"

namespace mtnet::nn {

// One trainable tensor as seen by the optimizer.
struct ParamSlot {
  std::string name;
  Tensor* value;
  Tensor* grad;
  bool decay;  // regularized by weight decay
};

// One persisted tensor as seen by the checkpoint writer (parameters plus
// batchnorm running statistics).
struct NamedTensor {
  std::string name;
  Tensor* t;
};

using ParamList = std::vector<ParamSlot>;
using StateList = std::vector<NamedTensor>;

// stride-1 square convolution with zero padding
struct Conv2d {
  int cin = 0, cout = 0, k = 0, pad = 0;
  bool has_bias = false;
  bool training = true;
  Tensor weight, gweight;
  Tensor bias, gbias;
  Tensor in_cache;

  Conv2d() = default;
  Conv2d(int cin, int cout, int k, int pad, bool bias);
  void init(std::mt19937& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(const std::string& prefix, ParamList& out);
  void collect_state(const std::string& prefix, StateList& out);
};

// kernel-2 stride-2 transposed convolution (2x upsampling)
struct ConvTranspose2x2 {
  int cin = 0, cout = 0;
  bool training = true;
  Tensor weight, gweight;  // cin x cout x 2 x 2
  Tensor in_cache;

  ConvTranspose2x2() = default;
  ConvTranspose2x2(int cin, int cout);
  void init(std::mt19937& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(const std::string& prefix, ParamList& out);
  void collect_state(const std::string& prefix, StateList& out);
};

struct BatchNorm2d {
  int c = 0;
  float eps = 1e-5f;
  float momentum = 0.1f;
  bool training = true;
  Tensor gamma, ggamma, beta, gbeta;
  Tensor running_mean, running_var;
  Tensor save_mean, save_invstd;
  Tensor in_cache;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int c);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(const std::string& prefix, ParamList& out);
  void collect_state(const std::string& prefix, StateList& out);
};

// conv (no bias) + batchnorm + relu
struct ConvBNReLU {
  Conv2d conv;
  BatchNorm2d bn;
  Tensor out_cache;  // relu output; its sign is the relu mask
  bool training = true;

  ConvBNReLU() = default;
  ConvBNReLU(int cin, int cout, int k, int pad);
  void init(std::mt19937& rng);
  void set_training(bool t);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(const std::string& prefix, ParamList& out);
  void collect_state(const std::string& prefix, StateList& out);
};

// conv with bias + relu (no norm), the head hidden layer
struct ConvReLU {
  Conv2d conv;
  Tensor out_cache;
  bool training = true;

  ConvReLU() = default;
  ConvReLU(int cin, int cout, int k, int pad);
  void init(std::mt19937& rng);
  void set_training(bool t);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(const std::string& prefix, ParamList& out);
  void collect_state(const std::string& prefix, StateList& out);
};

struct MaxPool2x2 {
  std::vector<int32_t> argmax;
  int n = 0, c = 0, h = 0, w = 0;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
};

struct BilinearResize {
  int hin = 0, win = 0;
  Tensor forward(const Tensor& x, int hout, int wout);
  Tensor backward(const Tensor& gy);
};

struct AdaptiveAvgPool {
  int bh = 0, bw = 0;
  int hin = 0, win = 0;
  AdaptiveAvgPool() = default;
  AdaptiveAvgPool(int bh, int bw) : bh(bh), bw(bw) {}
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
};

struct Sigmoid {
  Tensor out_cache;
  bool training = true;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy) const;
};

// channel concatenation of two tensors with matching n, h, w
Tensor concat_channels(const Tensor& a, const Tensor& b);
// inverse of concat_channels for the backward pass
void split_channels(const Tensor& g, int ca, Tensor& ga, Tensor& gb);

// He-normal fill for convolution weights, fan-in mode
void kaiming_init(Tensor& w, int fan_in, std::mt19937& rng);

}  // namespace mtnet::nn
