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

#include <cmath>
#include <random>

#include "doctest.h"
#include "mtnet/backbone.hpp"
#include "mtnet/config.hpp"
#include "mtnet/tensor.hpp"

using namespace mtnet;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.depth = 2;
  cfg.base_width = 4;
  cfg.feature_channels = 4;
  return cfg;
}

double weighted_sum(const Tensor& out, const Tensor& gout) {
  double s = 0.0;
  for (int64_t i = 0; i < out.size(); ++i)
    s += (double)gout.data[i] * out.data[i];
  return s;
}

}  // namespace

TEST_CASE("backbone: parameter count at the reference width") {
  Backbone net{ModelConfig{}};
  CHECK(net.param_count() == 28952640);
}

TEST_CASE("backbone: output preserves resolution and maps to feature channels") {
  ModelConfig cfg = tiny_config();
  Backbone net{cfg};
  std::mt19937 rng(1);
  net.init(rng);
  Tensor x = randn(2, 1, 16, 24, rng);
  Tensor f = net.forward(x);
  CHECK(f.n == 2);
  CHECK(f.c == cfg.feature_channels);
  CHECK(f.h == 16);
  CHECK(f.w == 24);
}

TEST_CASE("backbone: rejects inputs not divisible by the pooling factor") {
  Backbone net{tiny_config()};  // depth 2 needs multiples of 4
  std::mt19937 rng(2);
  net.init(rng);
  Tensor bad(1, 1, 18, 16);
  CHECK_THROWS_AS((void)net.forward(bad), std::invalid_argument);

  Backbone deep{ModelConfig{}};  // depth 4 needs multiples of 16
  std::mt19937 rng2(2);
  deep.init(rng2);
  Tensor bad2(1, 1, 24, 32);
  CHECK_THROWS_AS((void)deep.forward(bad2), std::invalid_argument);
}

TEST_CASE("backbone: initialization is seed-deterministic") {
  Backbone a{tiny_config()}, b{tiny_config()}, c{tiny_config()};
  std::mt19937 r1(42), r2(42), r3(43);
  a.init(r1);
  b.init(r2);
  c.init(r3);
  nn::ParamList pa, pb, pc;
  a.collect_params("m", pa);
  b.collect_params("m", pb);
  c.collect_params("m", pc);
  REQUIRE(pa.size() == pb.size());
  bool same = true, differs = false;
  for (size_t i = 0; i < pa.size(); ++i) {
    same = same && pa[i].value->data == pb[i].value->data;
    differs = differs || pa[i].value->data != pc[i].value->data;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("backbone: backward matches finite differences on a tiny net") {
  ModelConfig cfg = tiny_config();
  Backbone net{cfg};
  std::mt19937 rng(3);
  net.init(rng);
  Tensor x = randn(1, 1, 8, 8, rng);
  Tensor gout = randn(1, cfg.feature_channels, 8, 8, rng);

  (void)net.forward(x);
  nn::ParamList params;
  net.collect_params("m", params);
  for (auto& p : params) p.grad->zero();
  Tensor gx = net.backward(gout);

  // small step: at 1e-2 the curvature of the normalization layers dominates
  // the quotient and the comparison turns meaningless
  const float eps = 2e-3f;
  std::mt19937 pick_rng(4);

  SUBCASE("input gradient") {
    std::uniform_int_distribution<int64_t> pick(0, x.size() - 1);
    for (int s = 0; s < 6; ++s) {
      const int64_t i = pick(pick_rng);
      const float saved = x.data[i];
      x.data[i] = saved + eps;
      const double lp = weighted_sum(net.forward(x), gout);
      x.data[i] = saved - eps;
      const double lm = weighted_sum(net.forward(x), gout);
      x.data[i] = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      CHECK(std::abs(gx.data[i] - fd) <= 3e-3 + 6e-2 * std::abs(fd));
    }
  }

  SUBCASE("parameter gradients across layers") {
    std::uniform_int_distribution<size_t> pick_param(0, params.size() - 1);
    for (int s = 0; s < 10; ++s) {
      auto& p = params[pick_param(pick_rng)];
      std::uniform_int_distribution<int64_t> pick(0, p.value->size() - 1);
      const int64_t i = pick(pick_rng);
      const float saved = p.value->data[i];
      p.value->data[i] = saved + eps;
      const double lp = weighted_sum(net.forward(x), gout);
      p.value->data[i] = saved - eps;
      const double lm = weighted_sum(net.forward(x), gout);
      p.value->data[i] = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      CHECK(std::abs(p.grad->data[i] - fd) <= 3e-3 + 6e-2 * std::abs(fd));
    }
  }
}

TEST_CASE("backbone: transposed-conv upsampling is a distinct decoder") {
  ModelConfig interp = tiny_config();
  ModelConfig deconv = tiny_config();
  deconv.upsample = UpsampleKind::kDeconv;

  Backbone a{interp}, b{deconv};
  std::mt19937 r1(7), r2(7);
  a.init(r1);
  b.init(r2);
  CHECK(a.param_count() != b.param_count());

  std::mt19937 rx(8);
  Tensor x = randn(1, 1, 8, 8, rx);
  Tensor fa = a.forward(x);
  Tensor fb = b.forward(x);
  REQUIRE(fa.same_shape(fb));
  CHECK(fa.data != fb.data);

  // deconv path still trains: gradients flow to its kernel
  std::mt19937 rg(9);
  Tensor gout = randn(1, interp.feature_channels, 8, 8, rg);
  nn::ParamList params;
  b.collect_params("m", params);
  for (auto& p : params) p.grad->zero();
  (void)b.backward(gout);
  bool any_deconv_grad = false;
  for (auto& p : params) {
    if (p.name.find("deconv") == std::string::npos &&
        p.name.find("up") == std::string::npos)
      continue;
    for (float v : p.grad->data)
      if (v != 0.0f) any_deconv_grad = true;
  }
  CHECK(any_deconv_grad);
}
