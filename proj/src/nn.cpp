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
#include "mtnet/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mtnet/kernels.hpp"

namespace mtnet::nn {

void kaiming_init(Tensor& w, int fan_in, std::mt19937& rng) {
  std::normal_distribution<float> dist(0.0f,
                                       std::sqrt(2.0f / (float)fan_in));
  for (auto& v : w.data) v = dist(rng);
}

Conv2d::Conv2d(int cin, int cout, int k, int pad, bool bias)
    : cin(cin),
      cout(cout),
      k(k),
      pad(pad),
      has_bias(bias),
      weight(cout, cin, k, k),
      gweight(cout, cin, k, k) {
  if (has_bias) {
    this->bias = Tensor(1, 1, 1, cout);
    this->gbias = Tensor(1, 1, 1, cout);
  }
}

void Conv2d::init(std::mt19937& rng) {
  kaiming_init(weight, cin * k * k, rng);
  if (has_bias) bias.zero();
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.c != cin)
    throw std::invalid_argument("conv2d: expected " + std::to_string(cin) +
                                " input channels, got " + std::to_string(x.c));
  const int hout = x.h + 2 * pad - k + 1;
  const int wout = x.w + 2 * pad - k + 1;
  Tensor y(x.n, cout, hout, wout);
  kernels::conv2d_forward(x.ptr(), weight.ptr(), has_bias ? bias.ptr() : nullptr,
                          y.ptr(), x.n, cin, x.h, x.w, cout, k, pad);
  if (training) in_cache = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
  const Tensor& x = in_cache;
  kernels::conv2d_backward_params(gy.ptr(), x.ptr(), gweight.ptr(),
                                  has_bias ? gbias.ptr() : nullptr, x.n, cin,
                                  x.h, x.w, cout, k, pad);
  Tensor gx(x.n, cin, x.h, x.w);
  kernels::conv2d_backward_input(gy.ptr(), weight.ptr(), gx.ptr(), x.n, cin,
                                 x.h, x.w, cout, k, pad);
  return gx;
}

void Conv2d::collect_params(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".weight", &weight, &gweight, true});
  if (has_bias) out.push_back({prefix + ".bias", &bias, &gbias, false});
}

void Conv2d::collect_state(const std::string& prefix, StateList& out) {
  out.push_back({prefix + ".weight", &weight});
  if (has_bias) out.push_back({prefix + ".bias", &bias});
}

ConvTranspose2x2::ConvTranspose2x2(int cin, int cout)
    : cin(cin), cout(cout), weight(cin, cout, 2, 2), gweight(cin, cout, 2, 2) {}

void ConvTranspose2x2::init(std::mt19937& rng) {
  kaiming_init(weight, cin * 4, rng);
}

Tensor ConvTranspose2x2::forward(const Tensor& x) {
  if (x.c != cin)
    throw std::invalid_argument("convt2x2: expected " + std::to_string(cin) +
                                " input channels, got " + std::to_string(x.c));
  Tensor y(x.n, cout, 2 * x.h, 2 * x.w);
  kernels::convt2x2_forward(x.ptr(), weight.ptr(), nullptr, y.ptr(), x.n, cin,
                            x.h, x.w, cout);
  if (training) in_cache = x;
  return y;
}

Tensor ConvTranspose2x2::backward(const Tensor& gy) {
  const Tensor& x = in_cache;
  kernels::convt2x2_backward_params(gy.ptr(), x.ptr(), gweight.ptr(), nullptr,
                                    x.n, cin, x.h, x.w, cout);
  Tensor gx(x.n, cin, x.h, x.w);
  kernels::convt2x2_backward_input(gy.ptr(), weight.ptr(), gx.ptr(), x.n, cin,
                                   x.h, x.w, cout);
  return gx;
}

void ConvTranspose2x2::collect_params(const std::string& prefix,
                                      ParamList& out) {
  out.push_back({prefix + ".weight", &weight, &gweight, true});
}

void ConvTranspose2x2::collect_state(const std::string& prefix,
                                     StateList& out) {
  out.push_back({prefix + ".weight", &weight});
}

BatchNorm2d::BatchNorm2d(int c)
    : c(c),
      gamma(1, 1, 1, c),
      ggamma(1, 1, 1, c),
      beta(1, 1, 1, c),
      gbeta(1, 1, 1, c),
      running_mean(1, 1, 1, c),
      running_var(1, 1, 1, c),
      save_mean(1, 1, 1, c),
      save_invstd(1, 1, 1, c) {
  for (auto& v : gamma.data) v = 1.0f;
  for (auto& v : running_var.data) v = 1.0f;
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  if (x.c != c)
    throw std::invalid_argument("batchnorm: expected " + std::to_string(c) +
                                " channels, got " + std::to_string(x.c));
  Tensor y(x.n, x.c, x.h, x.w);
  if (training) {
    kernels::batchnorm_forward_train(
        x.ptr(), gamma.ptr(), beta.ptr(), y.ptr(), save_mean.ptr(),
        save_invstd.ptr(), running_mean.ptr(), running_var.ptr(), momentum,
        eps, x.n, c, x.h, x.w);
    in_cache = x;
  } else {
    kernels::batchnorm_forward_eval(x.ptr(), gamma.ptr(), beta.ptr(),
                                    running_mean.ptr(), running_var.ptr(), eps,
                                    y.ptr(), x.n, c, x.h, x.w);
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
  const Tensor& x = in_cache;
  Tensor gx(x.n, x.c, x.h, x.w);
  kernels::batchnorm_backward(gy.ptr(), x.ptr(), gamma.ptr(), save_mean.ptr(),
                              save_invstd.ptr(), gx.ptr(), ggamma.ptr(),
                              gbeta.ptr(), x.n, c, x.h, x.w);
  return gx;
}

void BatchNorm2d::collect_params(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".weight", &gamma, &ggamma, false});
  out.push_back({prefix + ".bias", &beta, &gbeta, false});
}

void BatchNorm2d::collect_state(const std::string& prefix, StateList& out) {
  out.push_back({prefix + ".weight", &gamma});
  out.push_back({prefix + ".bias", &beta});
  out.push_back({prefix + ".running_mean", &running_mean});
  out.push_back({prefix + ".running_var", &running_var});
}

ConvBNReLU::ConvBNReLU(int cin, int cout, int k, int pad)
    : conv(cin, cout, k, pad, false), bn(cout) {}

void ConvBNReLU::init(std::mt19937& rng) { conv.init(rng); }

void ConvBNReLU::set_training(bool t) {
  training = t;
  conv.training = t;
  bn.training = t;
}

Tensor ConvBNReLU::forward(const Tensor& x) {
  Tensor y = bn.forward(conv.forward(x));
  kernels::relu_forward(y.ptr(), y.ptr(), y.size());
  if (training) out_cache = y;
  return y;
}

Tensor ConvBNReLU::backward(const Tensor& gy) {
  Tensor g(gy.n, gy.c, gy.h, gy.w);
  kernels::relu_backward(gy.ptr(), out_cache.ptr(), g.ptr(), g.size());
  return conv.backward(bn.backward(g));
}

void ConvBNReLU::collect_params(const std::string& prefix, ParamList& out) {
  conv.collect_params(prefix + ".conv", out);
  bn.collect_params(prefix + ".bn", out);
}

void ConvBNReLU::collect_state(const std::string& prefix, StateList& out) {
  conv.collect_state(prefix + ".conv", out);
  bn.collect_state(prefix + ".bn", out);
}

ConvReLU::ConvReLU(int cin, int cout, int k, int pad)
    : conv(cin, cout, k, pad, true) {}

void ConvReLU::init(std::mt19937& rng) { conv.init(rng); }

void ConvReLU::set_training(bool t) {
  training = t;
  conv.training = t;
}

Tensor ConvReLU::forward(const Tensor& x) {
  Tensor y = conv.forward(x);
  kernels::relu_forward(y.ptr(), y.ptr(), y.size());
  if (training) out_cache = y;
  return y;
}

Tensor ConvReLU::backward(const Tensor& gy) {
  Tensor g(gy.n, gy.c, gy.h, gy.w);
  kernels::relu_backward(gy.ptr(), out_cache.ptr(), g.ptr(), g.size());
  return conv.backward(g);
}

void ConvReLU::collect_params(const std::string& prefix, ParamList& out) {
  conv.collect_params(prefix, out);
}

void ConvReLU::collect_state(const std::string& prefix, StateList& out) {
  conv.collect_state(prefix, out);
}

Tensor MaxPool2x2::forward(const Tensor& x) {
  if (x.h % 2 != 0 || x.w % 2 != 0)
    throw std::invalid_argument("maxpool2x2: odd extent " + x.shape());
  n = x.n;
  c = x.c;
  h = x.h;
  w = x.w;
  Tensor y(n, c, h / 2, w / 2);
  argmax.resize(y.size());
  kernels::maxpool2x2_forward(x.ptr(), y.ptr(), argmax.data(), n, c, h, w);
  return y;
}

Tensor MaxPool2x2::backward(const Tensor& gy) {
  Tensor gx(n, c, h, w);
  kernels::maxpool2x2_backward(gy.ptr(), argmax.data(), gx.ptr(), n, c, h, w);
  return gx;
}

Tensor BilinearResize::forward(const Tensor& x, int hout, int wout) {
  hin = x.h;
  win = x.w;
  Tensor y(x.n, x.c, hout, wout);
  kernels::bilinear_forward(x.ptr(), y.ptr(), x.n, x.c, x.h, x.w, hout, wout);
  return y;
}

Tensor BilinearResize::backward(const Tensor& gy) {
  Tensor gx(gy.n, gy.c, hin, win);
  kernels::bilinear_backward(gy.ptr(), gx.ptr(), gy.n, gy.c, hin, win, gy.h,
                             gy.w);
  return gx;
}

Tensor AdaptiveAvgPool::forward(const Tensor& x) {
  hin = x.h;
  win = x.w;
  Tensor y(x.n, x.c, bh, bw);
  kernels::adaptive_avgpool_forward(x.ptr(), y.ptr(), x.n, x.c, x.h, x.w, bh,
                                    bw);
  return y;
}

Tensor AdaptiveAvgPool::backward(const Tensor& gy) {
  Tensor gx(gy.n, gy.c, hin, win);
  kernels::adaptive_avgpool_backward(gy.ptr(), gx.ptr(), gy.n, gy.c, hin, win,
                                     bh, bw);
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x) {
  Tensor y(x.n, x.c, x.h, x.w);
  kernels::sigmoid_forward(x.ptr(), y.ptr(), x.size());
  if (training) out_cache = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& gy) const {
  Tensor gx(gy.n, gy.c, gy.h, gy.w);
  kernels::sigmoid_backward(gy.ptr(), out_cache.ptr(), gx.ptr(), gx.size());
  return gx;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w)
    throw std::invalid_argument("concat: shape mismatch " + a.shape() +
                                " vs " + b.shape());
  Tensor y(a.n, a.c + b.c, a.h, a.w);
  const size_t plane = (size_t)a.h * a.w;
  for (int ni = 0; ni < a.n; ++ni) {
    std::memcpy(y.ptr() + ((size_t)ni * y.c) * plane,
                a.ptr() + ((size_t)ni * a.c) * plane,
                (size_t)a.c * plane * sizeof(float));
    std::memcpy(y.ptr() + ((size_t)ni * y.c + a.c) * plane,
                b.ptr() + ((size_t)ni * b.c) * plane,
                (size_t)b.c * plane * sizeof(float));
  }
  return y;
}

void split_channels(const Tensor& g, int ca, Tensor& ga, Tensor& gb) {
  const int cb = g.c - ca;
  ga = Tensor(g.n, ca, g.h, g.w);
  gb = Tensor(g.n, cb, g.h, g.w);
  const size_t plane = (size_t)g.h * g.w;
  for (int ni = 0; ni < g.n; ++ni) {
    std::memcpy(ga.ptr() + ((size_t)ni * ca) * plane,
                g.ptr() + ((size_t)ni * g.c) * plane,
                (size_t)ca * plane * sizeof(float));
    std::memcpy(gb.ptr() + ((size_t)ni * cb) * plane,
                g.ptr() + ((size_t)ni * g.c + ca) * plane,
                (size_t)cb * plane * sizeof(float));
  }
}

}  // namespace mtnet::nn
