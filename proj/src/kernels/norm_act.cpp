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
#include <cstdint>

#include "mtnet/kernels.hpp"

namespace mtnet::kernels {

// Statistics run per channel with double accumulators in a fixed (n, y, x)
// order; parallelism is over channels only.
void batchnorm_forward_train(const float* in, const float* gamma,
                             const float* beta, float* out, float* save_mean,
                             float* save_invstd, float* running_mean,
                             float* running_var, float momentum, float eps,
                             int n, int c, int h, int w) {
  const size_t plane = (size_t)h * w;
  const double count = (double)n * plane;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < c; ++ci) {
    double sum = 0.0;
    for (int ni = 0; ni < n; ++ni) {
      const float* p = in + ((size_t)ni * c + ci) * plane;
      for (size_t i = 0; i < plane; ++i) sum += p[i];
    }
    const double mean = sum / count;
    double ssq = 0.0;
    for (int ni = 0; ni < n; ++ni) {
      const float* p = in + ((size_t)ni * c + ci) * plane;
      for (size_t i = 0; i < plane; ++i) {
        const double d = (double)p[i] - mean;
        ssq += d * d;
      }
    }
    const double var = ssq / count;
    const double invstd = 1.0 / std::sqrt(var + (double)eps);
    save_mean[ci] = (float)mean;
    save_invstd[ci] = (float)invstd;
    if (running_mean) {
      const double unbiased = count > 1.0 ? ssq / (count - 1.0) : var;
      running_mean[ci] =
          (1.0f - momentum) * running_mean[ci] + momentum * (float)mean;
      running_var[ci] =
          (1.0f - momentum) * running_var[ci] + momentum * (float)unbiased;
    }
    const float a = gamma[ci] * (float)invstd;
    const float b = beta[ci] - a * (float)mean;
    for (int ni = 0; ni < n; ++ni) {
      const float* p = in + ((size_t)ni * c + ci) * plane;
      float* q = out + ((size_t)ni * c + ci) * plane;
      for (size_t i = 0; i < plane; ++i) q[i] = a * p[i] + b;
    }
  }
}

void batchnorm_forward_eval(const float* in, const float* gamma,
                            const float* beta, const float* running_mean,
                            const float* running_var, float eps, float* out,
                            int n, int c, int h, int w) {
  const size_t plane = (size_t)h * w;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < c; ++ci) {
    const float invstd = 1.0f / std::sqrt(running_var[ci] + eps);
    const float a = gamma[ci] * invstd;
    const float b = beta[ci] - a * running_mean[ci];
    for (int ni = 0; ni < n; ++ni) {
      const float* p = in + ((size_t)ni * c + ci) * plane;
      float* q = out + ((size_t)ni * c + ci) * plane;
      for (size_t i = 0; i < plane; ++i) q[i] = a * p[i] + b;
    }
  }
}

void batchnorm_backward(const float* gout, const float* in, const float* gamma,
                        const float* save_mean, const float* save_invstd,
                        float* gin, float* ggamma, float* gbeta, int n, int c,
                        int h, int w) {
  const size_t plane = (size_t)h * w;
  const double count = (double)n * plane;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < c; ++ci) {
    const double mean = save_mean[ci];
    const double invstd = save_invstd[ci];
    double gsum = 0.0;   // sum of gout
    double gxsum = 0.0;  // sum of gout * xhat
    for (int ni = 0; ni < n; ++ni) {
      const float* gp = gout + ((size_t)ni * c + ci) * plane;
      const float* xp = in + ((size_t)ni * c + ci) * plane;
      for (size_t i = 0; i < plane; ++i) {
        const double xhat = ((double)xp[i] - mean) * invstd;
        gsum += gp[i];
        gxsum += gp[i] * xhat;
      }
    }
    if (ggamma) ggamma[ci] += (float)gxsum;
    if (gbeta) gbeta[ci] += (float)gsum;
    const double scale = (double)gamma[ci] * invstd / count;
    for (int ni = 0; ni < n; ++ni) {
      const float* gp = gout + ((size_t)ni * c + ci) * plane;
      const float* xp = in + ((size_t)ni * c + ci) * plane;
      float* gi = gin + ((size_t)ni * c + ci) * plane;
      for (size_t i = 0; i < plane; ++i) {
        const double xhat = ((double)xp[i] - mean) * invstd;
        gi[i] = (float)(scale * (count * gp[i] - gsum - xhat * gxsum));
      }
    }
  }
}

void relu_forward(const float* in, float* out, size_t count) {
  const int64_t cnt = (int64_t)count;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < cnt; ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
}

void relu_backward(const float* gout, const float* in, float* gin,
                   size_t count) {
  const int64_t cnt = (int64_t)count;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < cnt; ++i) gin[i] = in[i] > 0.0f ? gout[i] : 0.0f;
}

void sigmoid_forward(const float* in, float* out, size_t count) {
  const int64_t cnt = (int64_t)count;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < cnt; ++i) out[i] = 1.0f / (1.0f + std::exp(-in[i]));
}

void sigmoid_backward(const float* gout, const float* out, float* gin,
                      size_t count) {
  const int64_t cnt = (int64_t)count;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < cnt; ++i) gin[i] = gout[i] * out[i] * (1.0f - out[i]);
}

}  // namespace mtnet::kernels
