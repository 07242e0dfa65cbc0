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
#include <algorithm>

#include "mtnet/kernels.hpp"

namespace mtnet::kernels {

// Direct convolution as a sum of shifted axpy passes: for each filter tap the
// inner loop runs contiguously over a row of the output and a row of the
// input. Parallelism is over output channels, so each output element is
// accumulated by one thread in a fixed tap order.
void conv2d_forward(const float* in, const float* weight, const float* bias,
                    float* out, int n, int cin, int h, int w, int cout, int k,
                    int pad) {
  const int hout = h + 2 * pad - k + 1;
  const int wout = w + 2 * pad - k + 1;
  for (int ni = 0; ni < n; ++ni) {
    const float* ibase = in + (size_t)ni * cin * h * w;
    float* obase = out + (size_t)ni * cout * hout * wout;
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
      float* oplane = obase + (size_t)co * hout * wout;
      const float b = bias ? bias[co] : 0.0f;
      std::fill(oplane, oplane + (size_t)hout * wout, b);
      for (int ci = 0; ci < cin; ++ci) {
        const float* iplane = ibase + (size_t)ci * h * w;
        for (int ky = 0; ky < k; ++ky) {
          const int dy = ky - pad;
          const int y0 = std::max(0, -dy);
          const int y1 = std::min(hout, h - dy);
          for (int kx = 0; kx < k; ++kx) {
            const int dx = kx - pad;
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(wout, w - dx);
            const float wv = weight[(((size_t)co * cin + ci) * k + ky) * k + kx];
            for (int y = y0; y < y1; ++y) {
              const float* irow = iplane + (size_t)(y + dy) * w + dx;
              float* orow = oplane + (size_t)y * wout;
              for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
            }
          }
        }
      }
    }
  }
}

// Gradient w.r.t. the input is a full correlation with the flipped kernel;
// written directly as shifted axpy passes over the output gradient.
// Parallelism is over input channels.
void conv2d_backward_input(const float* gout, const float* weight, float* gin,
                           int n, int cin, int h, int w, int cout, int k,
                           int pad) {
  const int hout = h + 2 * pad - k + 1;
  const int wout = w + 2 * pad - k + 1;
  for (int ni = 0; ni < n; ++ni) {
    const float* gobase = gout + (size_t)ni * cout * hout * wout;
    float* gibase = gin + (size_t)ni * cin * h * w;
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < cin; ++ci) {
      float* giplane = gibase + (size_t)ci * h * w;
      std::fill(giplane, giplane + (size_t)h * w, 0.0f);
      for (int co = 0; co < cout; ++co) {
        const float* goplane = gobase + (size_t)co * hout * wout;
        for (int ky = 0; ky < k; ++ky) {
          const int dy = ky - pad;
          // gin[y][x] += gout[y - dy][x - dx] * w, valid output rows only
          const int y0 = std::max(0, dy);
          const int y1 = std::min(h, hout + dy);
          for (int kx = 0; kx < k; ++kx) {
            const int dx = kx - pad;
            const int x0 = std::max(0, dx);
            const int x1 = std::min(w, wout + dx);
            const float wv = weight[(((size_t)co * cin + ci) * k + ky) * k + kx];
            for (int y = y0; y < y1; ++y) {
              const float* gorow = goplane + (size_t)(y - dy) * wout - dx;
              float* girow = giplane + (size_t)y * w;
              for (int x = x0; x < x1; ++x) girow[x] += wv * gorow[x];
            }
          }
        }
      }
    }
  }
}

// Each thread owns one output channel and therefore a disjoint slice of the
// weight gradient and one bias gradient entry. Per-tap sums run in double
// over the whole batch.
void conv2d_backward_params(const float* gout, const float* in, float* gweight,
                            float* gbias, int n, int cin, int h, int w,
                            int cout, int k, int pad) {
  const int hout = h + 2 * pad - k + 1;
  const int wout = w + 2 * pad - k + 1;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    for (int ci = 0; ci < cin; ++ci) {
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - pad;
        const int y0 = std::max(0, -dy);
        const int y1 = std::min(hout, h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - pad;
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(wout, w - dx);
          double acc = 0.0;
          for (int ni = 0; ni < n; ++ni) {
            const float* goplane =
                gout + ((size_t)ni * cout + co) * hout * wout;
            const float* iplane = in + ((size_t)ni * cin + ci) * h * w;
            for (int y = y0; y < y1; ++y) {
              const float* gorow = goplane + (size_t)y * wout;
              const float* irow = iplane + (size_t)(y + dy) * w + dx;
              float racc = 0.0f;
              for (int x = x0; x < x1; ++x) racc += gorow[x] * irow[x];
              acc += racc;
            }
          }
          gweight[(((size_t)co * cin + ci) * k + ky) * k + kx] += (float)acc;
        }
      }
    }
    if (gbias) {
      double acc = 0.0;
      for (int ni = 0; ni < n; ++ni) {
        const float* goplane = gout + ((size_t)ni * cout + co) * hout * wout;
        for (size_t i = 0; i < (size_t)hout * wout; ++i) acc += goplane[i];
      }
      gbias[co] += (float)acc;
    }
  }
}

// Transposed 2x2 stride-2 convolution. Each input pixel feeds a disjoint 2x2
// output block, so the forward pass scatters without overlap.
void convt2x2_forward(const float* in, const float* weight, const float* bias,
                      float* out, int n, int cin, int h, int w, int cout) {
  const int hout = 2 * h;
  const int wout = 2 * w;
  for (int ni = 0; ni < n; ++ni) {
    const float* ibase = in + (size_t)ni * cin * h * w;
    float* obase = out + (size_t)ni * cout * hout * wout;
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
      float* oplane = obase + (size_t)co * hout * wout;
      const float b = bias ? bias[co] : 0.0f;
      std::fill(oplane, oplane + (size_t)hout * wout, b);
      for (int ci = 0; ci < cin; ++ci) {
        const float* iplane = ibase + (size_t)ci * h * w;
        for (int ky = 0; ky < 2; ++ky) {
          for (int kx = 0; kx < 2; ++kx) {
            const float wv = weight[(((size_t)ci * cout + co) * 2 + ky) * 2 + kx];
            for (int y = 0; y < h; ++y) {
              const float* irow = iplane + (size_t)y * w;
              float* orow = oplane + (size_t)(2 * y + ky) * wout + kx;
              for (int x = 0; x < w; ++x) orow[2 * x] += wv * irow[x];
            }
          }
        }
      }
    }
  }
}

void convt2x2_backward_input(const float* gout, const float* weight,
                             float* gin, int n, int cin, int h, int w,
                             int cout) {
  const int wout = 2 * w;
  for (int ni = 0; ni < n; ++ni) {
    const float* gobase = gout + (size_t)ni * cout * 4 * h * w;
    float* gibase = gin + (size_t)ni * cin * h * w;
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < cin; ++ci) {
      float* giplane = gibase + (size_t)ci * h * w;
      std::fill(giplane, giplane + (size_t)h * w, 0.0f);
      for (int co = 0; co < cout; ++co) {
        const float* goplane = gobase + (size_t)co * 4 * h * w;
        for (int ky = 0; ky < 2; ++ky) {
          for (int kx = 0; kx < 2; ++kx) {
            const float wv = weight[(((size_t)ci * cout + co) * 2 + ky) * 2 + kx];
            for (int y = 0; y < h; ++y) {
              const float* gorow = goplane + (size_t)(2 * y + ky) * wout + kx;
              float* girow = giplane + (size_t)y * w;
              for (int x = 0; x < w; ++x) girow[x] += wv * gorow[2 * x];
            }
          }
        }
      }
    }
  }
}

void convt2x2_backward_params(const float* gout, const float* in,
                              float* gweight, float* gbias, int n, int cin,
                              int h, int w, int cout) {
  const int wout = 2 * w;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < cin; ++ci) {
    for (int co = 0; co < cout; ++co) {
      for (int ky = 0; ky < 2; ++ky) {
        for (int kx = 0; kx < 2; ++kx) {
          double acc = 0.0;
          for (int ni = 0; ni < n; ++ni) {
            const float* iplane = in + ((size_t)ni * cin + ci) * h * w;
            const float* goplane = gout + ((size_t)ni * cout + co) * 4 * h * w;
            for (int y = 0; y < h; ++y) {
              const float* irow = iplane + (size_t)y * w;
              const float* gorow = goplane + (size_t)(2 * y + ky) * wout + kx;
              float racc = 0.0f;
              for (int x = 0; x < w; ++x) racc += irow[x] * gorow[2 * x];
              acc += racc;
            }
          }
          gweight[(((size_t)ci * cout + co) * 2 + ky) * 2 + kx] += (float)acc;
        }
      }
    }
  }
  if (gbias) {
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
      double acc = 0.0;
      for (int ni = 0; ni < n; ++ni) {
        const float* goplane = gout + ((size_t)ni * cout + co) * 4 * h * w;
        for (size_t i = 0; i < (size_t)4 * h * w; ++i) acc += goplane[i];
      }
      gbias[co] += (float)acc;
    }
  }
}

}  // namespace mtnet::kernels
