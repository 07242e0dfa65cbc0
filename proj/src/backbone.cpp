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
#include "mtnet/backbone.hpp"

#include <stdexcept>

#include "mtnet/kernels.hpp"

namespace mtnet {

UpBlock::UpBlock(int cin, int cout, UpsampleKind kind) : kind(kind), bn(cout) {
  if (kind == UpsampleKind::kInterp)
    conv = nn::Conv2d(cin, cout, 1, 0, false);
  else
    deconv = nn::ConvTranspose2x2(cin, cout);
}

void UpBlock::init(std::mt19937& rng) {
  if (kind == UpsampleKind::kInterp)
    conv.init(rng);
  else
    deconv.init(rng);
}

void UpBlock::set_training(bool t) {
  training = t;
  conv.training = t;
  deconv.training = t;
  bn.training = t;
}

Tensor UpBlock::forward(const Tensor& x) {
  Tensor y;
  if (kind == UpsampleKind::kInterp) {
    // conv at the coarse resolution, then interpolate
    y = resize.forward(conv.forward(x), 2 * x.h, 2 * x.w);
  } else {
    y = deconv.forward(x);
  }
  y = bn.forward(y);
  kernels::relu_forward(y.ptr(), y.ptr(), y.size());
  if (training) out_cache = y;
  return y;
}

Tensor UpBlock::backward(const Tensor& gy) {
  Tensor g(gy.n, gy.c, gy.h, gy.w);
  kernels::relu_backward(gy.ptr(), out_cache.ptr(), g.ptr(), g.size());
  g = bn.backward(g);
  if (kind == UpsampleKind::kInterp) return conv.backward(resize.backward(g));
  return deconv.backward(g);
}

void UpBlock::collect_params(const std::string& p, nn::ParamList& out) {
  if (kind == UpsampleKind::kInterp)
    conv.collect_params(p + ".conv", out);
  else
    deconv.collect_params(p + ".conv", out);
  bn.collect_params(p + ".bn", out);
}

void UpBlock::collect_state(const std::string& p, nn::StateList& out) {
  if (kind == UpsampleKind::kInterp)
    conv.collect_state(p + ".conv", out);
  else
    deconv.collect_state(p + ".conv", out);
  bn.collect_state(p + ".bn", out);
}

Backbone::Backbone(const ModelConfig& cfg)
    : depth(cfg.depth),
      in_channels(cfg.in_channels),
      feature_channels(cfg.feature_channels),
      proj(cfg.base_width, cfg.feature_channels, 1, 0) {
  cfg.validate();
  stages.reserve(depth + 1);
  for (int i = 0; i <= depth; ++i) {
    const int cout = cfg.base_width << i;
    const int cin = i == 0 ? cfg.in_channels : cfg.base_width << (i - 1);
    stages.emplace_back(cin, cout);
  }
  pools.resize(depth);
  ups.reserve(depth);
  decs.reserve(depth);
  for (int i = 0; i < depth; ++i) {
    const int c = cfg.base_width << i;
    ups.emplace_back(2 * c, c, cfg.upsample);
    decs.emplace_back(2 * c, c);
  }
  skip_grads.resize(depth);
}

void Backbone::init(std::mt19937& rng) {
  for (auto& s : stages) s.init(rng);
  for (auto& u : ups) u.init(rng);
  for (auto& d : decs) d.init(rng);
  proj.init(rng);
}

void Backbone::set_training(bool t) {
  for (auto& s : stages) s.set_training(t);
  for (auto& u : ups) u.set_training(t);
  for (auto& d : decs) d.set_training(t);
  proj.set_training(t);
}

Tensor Backbone::forward(const Tensor& image) {
  if (image.c != in_channels)
    throw std::invalid_argument("backbone: expected " +
                                std::to_string(in_channels) +
                                " input channels, got " +
                                std::to_string(image.c));
  const int div = 1 << depth;
  if (image.h % div != 0 || image.w % div != 0)
    throw std::invalid_argument(
        "backbone: input " + std::to_string(image.h) + "x" +
        std::to_string(image.w) + " not divisible by 2^depth = " +
        std::to_string(div));

  std::vector<Tensor> skips(depth);
  Tensor d = stages[0].forward(image);
  for (int i = 1; i <= depth; ++i) {
    skips[i - 1] = d;
    d = stages[i].forward(pools[i - 1].forward(d));
  }
  for (int i = depth - 1; i >= 0; --i) {
    Tensor u = ups[i].forward(d);
    d = decs[i].forward(nn::concat_channels(u, skips[i]));
  }
  return proj.forward(d);
}

Tensor Backbone::backward(const Tensor& gfeature) {
  Tensor g = proj.backward(gfeature);
  for (int i = 0; i < depth; ++i) {
    Tensor gcat = decs[i].backward(g);
    Tensor gu, gs;
    nn::split_channels(gcat, gcat.c / 2, gu, gs);
    skip_grads[i] = std::move(gs);
    g = ups[i].backward(gu);
  }
  for (int i = depth; i >= 1; --i) {
    g = pools[i - 1].backward(stages[i].backward(g));
    add_inplace(g, skip_grads[i - 1]);
  }
  return stages[0].backward(g);
}

void Backbone::collect_params(const std::string& p, nn::ParamList& out) {
  for (size_t i = 0; i < stages.size(); ++i)
    stages[i].collect_params(p + ".enc" + std::to_string(i), out);
  for (size_t i = 0; i < ups.size(); ++i)
    ups[i].collect_params(p + ".up" + std::to_string(i), out);
  for (size_t i = 0; i < decs.size(); ++i)
    decs[i].collect_params(p + ".dec" + std::to_string(i), out);
  proj.collect_params(p + ".proj", out);
}

void Backbone::collect_state(const std::string& p, nn::StateList& out) {
  for (size_t i = 0; i < stages.size(); ++i)
    stages[i].collect_state(p + ".enc" + std::to_string(i), out);
  for (size_t i = 0; i < ups.size(); ++i)
    ups[i].collect_state(p + ".up" + std::to_string(i), out);
  for (size_t i = 0; i < decs.size(); ++i)
    decs[i].collect_state(p + ".dec" + std::to_string(i), out);
  proj.collect_state(p + ".proj", out);
}

int64_t count_params(nn::ParamList& params) {
  int64_t total = 0;
  for (const auto& p : params) total += p.value->size();
  return total;
}

int64_t Backbone::param_count() {
  nn::ParamList params;
  collect_params("backbone", params);
  return count_params(params);
}

}  // namespace mtnet
