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
//
// OpenMP kernels vs. the serial reference implementations. Run with
// --benchmark_filter=conv to narrow down.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mtnet/kernels.hpp"
#include "mtnet/tensor.hpp"

namespace {

using namespace mtnet;

struct ConvSetup {
  Tensor in, weight, bias, out;
  int c, h, w, k;

  ConvSetup(int c, int h, int w, int k)
      : in(1, c, h, w),
        weight(c, c, k, k),
        bias(1, 1, 1, c),
        out(1, c, h, w),
        c(c),
        h(h),
        w(w),
        k(k) {
    std::mt19937 rng(7);
    in = rand_uniform(1, c, h, w, rng);
    weight = randn(c, c, k, k, rng, 0.05f);
    bias = rand_uniform(1, 1, 1, c, rng);
  }
};

void BM_conv3x3_omp(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  ConvSetup cs(c, s, s, 3);
  for (auto _ : state) {
    kernels::conv2d_forward(cs.in.ptr(), cs.weight.ptr(), cs.bias.ptr(),
                            cs.out.ptr(), 1, c, s, s, c, 3, 1);
    benchmark::DoNotOptimize(cs.out.ptr());
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)c * c * s * s * 9 * 2);
}

void BM_conv3x3_serial(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  ConvSetup cs(c, s, s, 3);
  for (auto _ : state) {
    kernels::serial::conv2d_forward(cs.in.ptr(), cs.weight.ptr(),
                                    cs.bias.ptr(), cs.out.ptr(), 1, c, s, s, c,
                                    3, 1);
    benchmark::DoNotOptimize(cs.out.ptr());
  }
  state.SetItemsProcessed(state.iterations() * (int64_t)c * c * s * s * 9 * 2);
}

void BM_bilinear_omp(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  std::mt19937 rng(7);
  Tensor in = rand_uniform(1, c, s, s, rng);
  Tensor out(1, c, 2 * s, 2 * s);
  for (auto _ : state) {
    kernels::bilinear_forward(in.ptr(), out.ptr(), 1, c, s, s, 2 * s, 2 * s);
    benchmark::DoNotOptimize(out.ptr());
  }
}

void BM_bilinear_serial(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  std::mt19937 rng(7);
  Tensor in = rand_uniform(1, c, s, s, rng);
  Tensor out(1, c, 2 * s, 2 * s);
  for (auto _ : state) {
    kernels::serial::bilinear_forward(in.ptr(), out.ptr(), 1, c, s, s, 2 * s,
                                      2 * s);
    benchmark::DoNotOptimize(out.ptr());
  }
}

void BM_batchnorm_omp(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  std::mt19937 rng(7);
  Tensor in = rand_uniform(4, c, s, s, rng);
  Tensor gamma = rand_uniform(1, 1, 1, c, rng), beta(1, 1, 1, c);
  Tensor out(4, c, s, s);
  std::vector<float> mean(c), invstd(c);
  for (auto _ : state) {
    kernels::batchnorm_forward_train(in.ptr(), gamma.ptr(), beta.ptr(),
                                     out.ptr(), mean.data(), invstd.data(),
                                     nullptr, nullptr, 0.1f, 1e-5f, 4, c, s,
                                     s);
    benchmark::DoNotOptimize(out.ptr());
  }
}

void BM_batchnorm_serial(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  std::mt19937 rng(7);
  Tensor in = rand_uniform(4, c, s, s, rng);
  Tensor gamma = rand_uniform(1, 1, 1, c, rng), beta(1, 1, 1, c);
  Tensor out(4, c, s, s);
  std::vector<float> mean(c), invstd(c);
  for (auto _ : state) {
    kernels::serial::batchnorm_forward_train(
        in.ptr(), gamma.ptr(), beta.ptr(), out.ptr(), mean.data(),
        invstd.data(), nullptr, nullptr, 0.1f, 1e-5f, 4, c, s, s);
    benchmark::DoNotOptimize(out.ptr());
  }
}

void BM_maxpool_omp(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  std::mt19937 rng(7);
  Tensor in = rand_uniform(1, c, s, s, rng);
  Tensor out(1, c, s / 2, s / 2);
  std::vector<int32_t> argmax((size_t)c * (s / 2) * (s / 2));
  for (auto _ : state) {
    kernels::maxpool2x2_forward(in.ptr(), out.ptr(), argmax.data(), 1, c, s,
                                s);
    benchmark::DoNotOptimize(out.ptr());
  }
}

void BM_maxpool_serial(benchmark::State& state) {
  const int c = (int)state.range(0), s = (int)state.range(1);
  std::mt19937 rng(7);
  Tensor in = rand_uniform(1, c, s, s, rng);
  Tensor out(1, c, s / 2, s / 2);
  std::vector<int32_t> argmax((size_t)c * (s / 2) * (s / 2));
  for (auto _ : state) {
    kernels::serial::maxpool2x2_forward(in.ptr(), out.ptr(), argmax.data(), 1,
                                        c, s, s);
    benchmark::DoNotOptimize(out.ptr());
  }
}

}  // namespace

BENCHMARK(BM_conv3x3_omp)->Args({32, 64})->Args({64, 32})->Args({64, 128});
BENCHMARK(BM_conv3x3_serial)->Args({32, 64})->Args({64, 32})->Args({64, 128});
BENCHMARK(BM_bilinear_omp)->Args({64, 64});
BENCHMARK(BM_bilinear_serial)->Args({64, 64});
BENCHMARK(BM_batchnorm_omp)->Args({64, 64});
BENCHMARK(BM_batchnorm_serial)->Args({64, 64});
BENCHMARK(BM_maxpool_omp)->Args({64, 128});
BENCHMARK(BM_maxpool_serial)->Args({64, 128});

BENCHMARK_MAIN();
