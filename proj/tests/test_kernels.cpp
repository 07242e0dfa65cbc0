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
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "mtnet/kernels.hpp"
#include "mtnet/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mtnet;
namespace K = mtnet::kernels;

namespace {

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.same_shape(b) &&
         std::memcmp(a.ptr(), b.ptr(), a.data.size() * sizeof(float)) == 0;
}

// central-difference check of an analytic gradient. forward() must write the
// model output for the current contents of param; loss is sum(gout * out).
void check_gradient(Tensor& param, const Tensor& analytic,
                    const Tensor& gout, Tensor& out,
                    const std::function<void()>& forward, std::mt19937& rng,
                    int samples = 12, float eps = 1e-2f, double rtol = 5e-2,
                    double atol = 2e-3) {
  REQUIRE(param.same_shape(analytic));
  std::uniform_int_distribution<int64_t> pick(0, param.size() - 1);
  auto loss = [&]() {
    forward();
    double s = 0.0;
    for (int64_t i = 0; i < out.size(); ++i) s += (double)gout.data[i] * out.data[i];
    return s;
  };
  for (int s = 0; s < samples; ++s) {
    const int64_t i = pick(rng);
    const float saved = param.data[i];
    param.data[i] = saved + eps;
    const double lp = loss();
    param.data[i] = saved - eps;
    const double lm = loss();
    param.data[i] = saved;
    forward();
    const double fd = (lp - lm) / (2.0 * eps);
    const double got = analytic.data[i];
    CHECK(std::abs(got - fd) <= atol + rtol * std::abs(fd));
  }
}

}  // namespace

TEST_CASE("kernels: conv2d forward matches hand-computed values") {
  Tensor in(1, 1, 3, 3);
  for (int i = 0; i < 9; ++i) in.data[i] = (float)(i + 1);

  Tensor w3(1, 1, 3, 3, 1.0f);
  std::vector<float> bias{0.5f};
  Tensor out(1, 1, 3, 3);
  K::conv2d_forward(in.ptr(), w3.ptr(), bias.data(), out.ptr(), 1, 1, 3, 3, 1,
                    3, 1);
  CHECK(out.at(0, 0, 0, 0) == doctest::Approx(12.5));
  CHECK(out.at(0, 0, 1, 1) == doctest::Approx(45.5));
  CHECK(out.at(0, 0, 2, 2) == doctest::Approx(28.5));

  // 1x1 kernel is an affine map per pixel
  Tensor w1(1, 1, 1, 1);
  w1.data[0] = 2.0f;
  std::vector<float> b1{-1.0f};
  Tensor out1(1, 1, 3, 3);
  K::conv2d_forward(in.ptr(), w1.ptr(), b1.data(), out1.ptr(), 1, 1, 3, 3, 1,
                    1, 0);
  for (int i = 0; i < 9; ++i)
    CHECK(out1.data[i] == doctest::Approx(2.0f * in.data[i] - 1.0f));
}

TEST_CASE("kernels: omp kernels are bit-identical to the serial reference") {
#ifdef _OPENMP
  omp_set_num_threads(3);
#endif
  std::mt19937 rng(7);
  const int n = 2, h = 10, w = 12;

  SUBCASE("conv2d forward/backward, k=3 pad=1 and k=1 pad=0") {
    for (auto [k, pad] : {std::pair{3, 1}, std::pair{1, 0}}) {
      const int cin = 3, cout = 4;
      Tensor in = randn(n, cin, h, w, rng);
      Tensor wt = randn(cout, cin, k, k, rng);
      Tensor bias = randn(1, 1, 1, cout, rng);
      const int ho = h + 2 * pad - k + 1, wo = w + 2 * pad - k + 1;
      Tensor a(n, cout, ho, wo), b(n, cout, ho, wo);
      K::conv2d_forward(in.ptr(), wt.ptr(), bias.ptr(), a.ptr(), n, cin, h, w,
                        cout, k, pad);
      K::serial::conv2d_forward(in.ptr(), wt.ptr(), bias.ptr(), b.ptr(), n,
                                cin, h, w, cout, k, pad);
      CHECK(bit_equal(a, b));

      Tensor gout = randn(n, cout, ho, wo, rng);
      Tensor gia(n, cin, h, w), gib(n, cin, h, w);
      K::conv2d_backward_input(gout.ptr(), wt.ptr(), gia.ptr(), n, cin, h, w,
                               cout, k, pad);
      K::serial::conv2d_backward_input(gout.ptr(), wt.ptr(), gib.ptr(), n, cin,
                                       h, w, cout, k, pad);
      CHECK(bit_equal(gia, gib));

      Tensor gwa(cout, cin, k, k), gwb(cout, cin, k, k);
      Tensor gba(1, 1, 1, cout), gbb(1, 1, 1, cout);
      K::conv2d_backward_params(gout.ptr(), in.ptr(), gwa.ptr(), gba.ptr(), n,
                                cin, h, w, cout, k, pad);
      K::serial::conv2d_backward_params(gout.ptr(), in.ptr(), gwb.ptr(),
                                        gbb.ptr(), n, cin, h, w, cout, k, pad);
      CHECK(bit_equal(gwa, gwb));
      CHECK(bit_equal(gba, gbb));
    }
  }

  SUBCASE("transposed conv 2x2 forward") {
    const int cin = 4, cout = 3;
    Tensor in = randn(n, cin, h, w, rng);
    Tensor wt = randn(cin, cout, 2, 2, rng);
    Tensor bias = randn(1, 1, 1, cout, rng);
    Tensor a(n, cout, 2 * h, 2 * w), b(n, cout, 2 * h, 2 * w);
    K::convt2x2_forward(in.ptr(), wt.ptr(), bias.ptr(), a.ptr(), n, cin, h, w,
                        cout);
    K::serial::convt2x2_forward(in.ptr(), wt.ptr(), bias.ptr(), b.ptr(), n,
                                cin, h, w, cout);
    CHECK(bit_equal(a, b));
  }

  SUBCASE("maxpool 2x2 forward") {
    const int c = 5;
    Tensor in = randn(n, c, h, w, rng);
    Tensor a(n, c, h / 2, w / 2), b(n, c, h / 2, w / 2);
    std::vector<int32_t> arga(a.size()), argb(b.size());
    K::maxpool2x2_forward(in.ptr(), a.ptr(), arga.data(), n, c, h, w);
    K::serial::maxpool2x2_forward(in.ptr(), b.ptr(), argb.data(), n, c, h, w);
    CHECK(bit_equal(a, b));
    CHECK(arga == argb);
  }

  SUBCASE("bilinear resize") {
    const int c = 3;
    Tensor in = randn(n, c, h, w, rng);
    Tensor a(n, c, 17, 23), b(n, c, 17, 23);
    K::bilinear_forward(in.ptr(), a.ptr(), n, c, h, w, 17, 23);
    K::serial::bilinear_forward(in.ptr(), b.ptr(), n, c, h, w, 17, 23);
    CHECK(bit_equal(a, b));
  }

  SUBCASE("adaptive average pooling") {
    const int c = 3;
    Tensor in = randn(n, c, h, w, rng);
    Tensor a(n, c, 3, 3), b(n, c, 3, 3);
    K::adaptive_avgpool_forward(in.ptr(), a.ptr(), n, c, h, w, 3, 3);
    K::serial::adaptive_avgpool_forward(in.ptr(), b.ptr(), n, c, h, w, 3, 3);
    CHECK(bit_equal(a, b));
  }

  SUBCASE("batchnorm training forward") {
    const int c = 4;
    Tensor in = randn(n, c, h, w, rng);
    Tensor gamma = rand_uniform(1, 1, 1, c, rng, 0.5f, 1.5f);
    Tensor beta = randn(1, 1, 1, c, rng);
    Tensor a(n, c, h, w), b(n, c, h, w);
    std::vector<float> ma(c), ia(c), rma(c, 0.f), rva(c, 1.f);
    std::vector<float> mb(c), ib(c), rmb(c, 0.f), rvb(c, 1.f);
    K::batchnorm_forward_train(in.ptr(), gamma.ptr(), beta.ptr(), a.ptr(),
                               ma.data(), ia.data(), rma.data(), rva.data(),
                               0.1f, 1e-5f, n, c, h, w);
    K::serial::batchnorm_forward_train(in.ptr(), gamma.ptr(), beta.ptr(),
                                       b.ptr(), mb.data(), ib.data(),
                                       rmb.data(), rvb.data(), 0.1f, 1e-5f, n,
                                       c, h, w);
    CHECK(bit_equal(a, b));
    CHECK(ma == mb);
    CHECK(ia == ib);
    CHECK(rma == rmb);
    CHECK(rva == rvb);
  }
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
}

TEST_CASE("kernels: conv2d gradients match finite differences") {
  std::mt19937 rng(11);
  const int n = 2, cin = 2, h = 6, w = 7, cout = 3, k = 3, pad = 1;
  Tensor in = randn(n, cin, h, w, rng);
  Tensor wt = randn(cout, cin, k, k, rng, 0.3f);
  Tensor bias = randn(1, 1, 1, cout, rng);
  Tensor out(n, cout, h, w);
  Tensor gout = randn(n, cout, h, w, rng);

  auto fwd = [&]() {
    K::conv2d_forward(in.ptr(), wt.ptr(), bias.ptr(), out.ptr(), n, cin, h, w,
                      cout, k, pad);
  };
  fwd();
  Tensor gin(n, cin, h, w);
  Tensor gw(cout, cin, k, k);
  Tensor gb(1, 1, 1, cout);
  K::conv2d_backward_input(gout.ptr(), wt.ptr(), gin.ptr(), n, cin, h, w, cout,
                           k, pad);
  K::conv2d_backward_params(gout.ptr(), in.ptr(), gw.ptr(), gb.ptr(), n, cin,
                            h, w, cout, k, pad);

  check_gradient(in, gin, gout, out, fwd, rng);
  check_gradient(wt, gw, gout, out, fwd, rng);
  check_gradient(bias, gb, gout, out, fwd, rng, 3);
}

TEST_CASE("kernels: transposed conv gradients match finite differences") {
  std::mt19937 rng(13);
  const int n = 2, cin = 3, h = 5, w = 6, cout = 2;
  Tensor in = randn(n, cin, h, w, rng);
  Tensor wt = randn(cin, cout, 2, 2, rng, 0.3f);
  Tensor bias = randn(1, 1, 1, cout, rng);
  Tensor out(n, cout, 2 * h, 2 * w);
  Tensor gout = randn(n, cout, 2 * h, 2 * w, rng);

  auto fwd = [&]() {
    K::convt2x2_forward(in.ptr(), wt.ptr(), bias.ptr(), out.ptr(), n, cin, h,
                        w, cout);
  };
  fwd();
  Tensor gin(n, cin, h, w);
  Tensor gw(cin, cout, 2, 2);
  Tensor gb(1, 1, 1, cout);
  K::convt2x2_backward_input(gout.ptr(), wt.ptr(), gin.ptr(), n, cin, h, w,
                             cout);
  K::convt2x2_backward_params(gout.ptr(), in.ptr(), gw.ptr(), gb.ptr(), n, cin,
                              h, w, cout);

  check_gradient(in, gin, gout, out, fwd, rng);
  check_gradient(wt, gw, gout, out, fwd, rng);
}

TEST_CASE("kernels: maxpool picks the first maximum and routes gradients") {
  Tensor in(1, 1, 2, 4);
  // left window is a four-way tie, right window has a unique winner
  in.data = {3.f, 3.f, 1.f, 9.f, 3.f, 3.f, 9.f, 2.f};
  Tensor out(1, 1, 1, 2);
  std::vector<int32_t> argmax(2);
  K::maxpool2x2_forward(in.ptr(), out.ptr(), argmax.data(), 1, 1, 2, 4);
  CHECK(out.data[0] == 3.f);
  CHECK(out.data[1] == 9.f);
  CHECK(argmax[0] == 0);  // tie resolves to the top-left element
  CHECK(argmax[1] == 3);

  Tensor gout(1, 1, 1, 2);
  gout.data = {5.f, 7.f};
  Tensor gin(1, 1, 2, 4);
  K::maxpool2x2_backward(gout.ptr(), argmax.data(), gin.ptr(), 1, 1, 2, 4);
  std::vector<float> want{5.f, 0.f, 0.f, 7.f, 0.f, 0.f, 0.f, 0.f};
  CHECK(gin.data == want);
}

TEST_CASE("kernels: bilinear resize at identity scale is an exact copy") {
  std::mt19937 rng(17);
  Tensor in = randn(2, 3, 9, 11, rng);
  Tensor out(2, 3, 9, 11);
  K::bilinear_forward(in.ptr(), out.ptr(), 2, 3, 9, 11, 9, 11);
  CHECK(bit_equal(in, out));
}

TEST_CASE("kernels: bilinear resize preserves constant images") {
  Tensor in(1, 2, 7, 5, 0.73f);
  Tensor out(1, 2, 13, 22);
  K::bilinear_forward(in.ptr(), out.ptr(), 1, 2, 7, 5, 13, 22);
  for (float v : out.data) CHECK(v == doctest::Approx(0.73f).epsilon(1e-6));
}

TEST_CASE("kernels: bilinear backward matches finite differences") {
  std::mt19937 rng(19);
  Tensor in = randn(1, 2, 6, 8, rng);
  Tensor out(1, 2, 11, 5);
  Tensor gout = randn(1, 2, 11, 5, rng);
  auto fwd = [&]() { K::bilinear_forward(in.ptr(), out.ptr(), 1, 2, 6, 8, 11, 5); };
  fwd();
  Tensor gin(1, 2, 6, 8);
  K::bilinear_backward(gout.ptr(), gin.ptr(), 1, 2, 6, 8, 11, 5);
  check_gradient(in, gin, gout, out, fwd, rng);
}

TEST_CASE("kernels: adaptive average pooling uses floor/ceil cell bounds") {
  SUBCASE("6x6 to 2x2 averages disjoint 3x3 blocks") {
    Tensor in(1, 1, 6, 6);
    for (int i = 0; i < 36; ++i) in.data[i] = (float)i;
    Tensor out(1, 1, 2, 2);
    K::adaptive_avgpool_forward(in.ptr(), out.ptr(), 1, 1, 6, 6, 2, 2);
    // mean over rows r0..r0+2, cols c0..c0+2 of value 6r+c
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(7.0));
    CHECK(out.at(0, 0, 0, 1) == doctest::Approx(10.0));
    CHECK(out.at(0, 0, 1, 0) == doctest::Approx(25.0));
    CHECK(out.at(0, 0, 1, 1) == doctest::Approx(28.0));
  }
  SUBCASE("5x5 to 3x3 has overlapping middle cells") {
    std::mt19937 rng(23);
    Tensor in = randn(1, 1, 5, 5, rng);
    Tensor out(1, 1, 3, 3);
    K::adaptive_avgpool_forward(in.ptr(), out.ptr(), 1, 1, 5, 5, 3, 3);
    auto cell = [&](int by, int bx) {
      const int y0 = by * 5 / 3, y1 = ((by + 1) * 5 + 2) / 3;
      const int x0 = bx * 5 / 3, x1 = ((bx + 1) * 5 + 2) / 3;
      double s = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s += in.at(0, 0, y, x);
      return s / ((y1 - y0) * (x1 - x0));
    };
    for (int by = 0; by < 3; ++by)
      for (int bx = 0; bx < 3; ++bx)
        CHECK(out.at(0, 0, by, bx) == doctest::Approx(cell(by, bx)));
  }
}

TEST_CASE("kernels: adaptive average pooling backward matches finite differences") {
  std::mt19937 rng(29);
  Tensor in = randn(1, 2, 5, 7, rng);
  Tensor out(1, 2, 3, 3);
  Tensor gout = randn(1, 2, 3, 3, rng);
  auto fwd = [&]() {
    K::adaptive_avgpool_forward(in.ptr(), out.ptr(), 1, 2, 5, 7, 3, 3);
  };
  fwd();
  Tensor gin(1, 2, 5, 7);
  K::adaptive_avgpool_backward(gout.ptr(), gin.ptr(), 1, 2, 5, 7, 3, 3);
  check_gradient(in, gin, gout, out, fwd, rng);
}

TEST_CASE("kernels: batchnorm training normalizes and tracks running stats") {
  std::mt19937 rng(31);
  const int n = 2, c = 3, h = 4, w = 5;
  Tensor in = randn(n, c, h, w, rng);
  for (auto& v : in.data) v = 2.0f * v + 1.0f;
  Tensor gamma(1, 1, 1, c, 1.0f);
  Tensor beta(1, 1, 1, c, 0.0f);
  Tensor out(n, c, h, w);
  std::vector<float> mean(c), invstd(c), rmean(c, 0.f), rvar(c, 1.f);
  K::batchnorm_forward_train(in.ptr(), gamma.ptr(), beta.ptr(), out.ptr(),
                             mean.data(), invstd.data(), rmean.data(),
                             rvar.data(), 0.1f, 1e-5f, n, c, h, w);

  const double count = (double)n * h * w;
  for (int ci = 0; ci < c; ++ci) {
    double s = 0, ss = 0, bmean = 0, bssq = 0;
    for (int ni = 0; ni < n; ++ni)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double v = out.at(ni, ci, y, x);
          s += v;
          ss += v * v;
          const double u = in.at(ni, ci, y, x);
          bmean += u;
        }
    bmean /= count;
    for (int ni = 0; ni < n; ++ni)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double d = in.at(ni, ci, y, x) - bmean;
          bssq += d * d;
        }
    CHECK(std::abs(s / count) < 1e-4);
    CHECK(ss / count == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(mean[ci] == doctest::Approx(bmean).epsilon(1e-4));
    CHECK(rmean[ci] == doctest::Approx(0.1 * bmean).epsilon(1e-4));
    const double unbiased = bssq / (count - 1.0);
    CHECK(rvar[ci] == doctest::Approx(0.9 + 0.1 * unbiased).epsilon(1e-4));
  }

  SUBCASE("eval forward applies the frozen affine transform") {
    Tensor eval_out(n, c, h, w);
    K::batchnorm_forward_eval(in.ptr(), gamma.ptr(), beta.ptr(), rmean.data(),
                              rvar.data(), 1e-5f, eval_out.ptr(), n, c, h, w);
    for (int ci = 0; ci < c; ++ci) {
      const float a = 1.0f / std::sqrt(rvar[ci] + 1e-5f);
      for (int ni = 0; ni < n; ++ni)
        CHECK(eval_out.at(ni, ci, 1, 1) ==
              doctest::Approx(a * (in.at(ni, ci, 1, 1) - rmean[ci])));
    }
  }
}

TEST_CASE("kernels: batchnorm backward matches finite differences") {
  std::mt19937 rng(37);
  const int n = 2, c = 2, h = 4, w = 4;
  Tensor in = randn(n, c, h, w, rng);
  Tensor gamma = rand_uniform(1, 1, 1, c, rng, 0.5f, 1.5f);
  Tensor beta = randn(1, 1, 1, c, rng);
  Tensor out(n, c, h, w);
  Tensor gout = randn(n, c, h, w, rng);
  std::vector<float> mean(c), invstd(c);

  auto fwd = [&]() {
    K::batchnorm_forward_train(in.ptr(), gamma.ptr(), beta.ptr(), out.ptr(),
                               mean.data(), invstd.data(), nullptr, nullptr,
                               0.1f, 1e-5f, n, c, h, w);
  };
  fwd();
  Tensor gin(n, c, h, w);
  Tensor ggamma(1, 1, 1, c);
  Tensor gbeta(1, 1, 1, c);
  K::batchnorm_backward(gout.ptr(), in.ptr(), gamma.ptr(), mean.data(),
                        invstd.data(), gin.ptr(), ggamma.ptr(), gbeta.ptr(), n,
                        c, h, w);
  check_gradient(in, gin, gout, out, fwd, rng, 12, 1e-2f, 5e-2, 5e-3);
  check_gradient(gamma, ggamma, gout, out, fwd, rng, 2);
  check_gradient(beta, gbeta, gout, out, fwd, rng, 2);
}

TEST_CASE("kernels: relu and sigmoid activations") {
  Tensor in(1, 1, 1, 4);
  in.data = {-2.f, -0.5f, 0.5f, 2.f};
  Tensor out(1, 1, 1, 4);
  K::relu_forward(in.ptr(), out.ptr(), 4);
  CHECK(out.data == std::vector<float>{0.f, 0.f, 0.5f, 2.f});

  Tensor gout(1, 1, 1, 4, 1.0f);
  Tensor gin(1, 1, 1, 4);
  K::relu_backward(gout.ptr(), in.ptr(), gin.ptr(), 4);
  CHECK(gin.data == std::vector<float>{0.f, 0.f, 1.f, 1.f});

  K::sigmoid_forward(in.ptr(), out.ptr(), 4);
  for (int i = 0; i < 4; ++i)
    CHECK(out.data[i] == doctest::Approx(1.0 / (1.0 + std::exp(-in.data[i]))));

  K::sigmoid_backward(gout.ptr(), out.ptr(), gin.ptr(), 4);
  for (int i = 0; i < 4; ++i)
    CHECK(gin.data[i] == doctest::Approx(out.data[i] * (1.0f - out.data[i])));
}
