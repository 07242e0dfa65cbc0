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

// Plain single-threaded reference kernels. Written in the naive per-output
// form, with the same per-element accumulation order as the parallel kernels
// so that outputs match bit for bit.
#include <algorithm>
#include <cmath>
#include <cstring>

#include "mtnet/kernels.hpp"

namespace mtnet::kernels::serial {

void conv2d_forward(const float* in, const float* weight, const float* bias,
                    float* out, int n, int cin, int h, int w, int cout, int k,
                    int pad) {
  const int hout = h + 2 * pad - k + 1;
  const int wout = w + 2 * pad - k + 1;
  for (int ni = 0; ni < n; ++ni) {
    for (int co = 0; co < cout; ++co) {
      for (int oy = 0; oy < hout; ++oy) {
        for (int ox = 0; ox < wout; ++ox) {
          float acc = bias ? bias[co] : 0.0f;
          for (int ci = 0; ci < cin; ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              const int iy = oy + ky - pad;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ox + kx - pad;
                if (ix < 0 || ix >= w) continue;
                acc += weight[(((size_t)co * cin + ci) * k + ky) * k + kx] *
                       in[((size_t)ni * cin + ci) * h * w + (size_t)iy * w + ix];
              }
            }
          }
          out[((size_t)ni * cout + co) * hout * wout + (size_t)oy * wout + ox] =
              acc;
        }
      }
    }
  }
}

void conv2d_backward_input(const float* gout, const float* weight, float* gin,
                           int n, int cin, int h, int w, int cout, int k,
                           int pad) {
  const int hout = h + 2 * pad - k + 1;
  const int wout = w + 2 * pad - k + 1;
  for (int ni = 0; ni < n; ++ni) {
    for (int ci = 0; ci < cin; ++ci) {
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < w; ++ix) {
          float acc = 0.0f;
          for (int co = 0; co < cout; ++co) {
            for (int ky = 0; ky < k; ++ky) {
              const int oy = iy - ky + pad;
              if (oy < 0 || oy >= hout) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int ox = ix - kx + pad;
                if (ox < 0 || ox >= wout) continue;
                acc += weight[(((size_t)co * cin + ci) * k + ky) * k + kx] *
                       gout[((size_t)ni * cout + co) * hout * wout +
                            (size_t)oy * wout + ox];
              }
            }
          }
          gin[((size_t)ni * cin + ci) * h * w + (size_t)iy * w + ix] = acc;
        }
      }
    }
  }
}

void conv2d_backward_params(const float* gout, const float* in, float* gweight,
                            float* gbias, int n, int cin, int h, int w,
                            int cout, int k, int pad) {
  const int hout = h + 2 * pad - k + 1;
  const int wout = w + 2 * pad - k + 1;
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

void convt2x2_forward(const float* in, const float* weight, const float* bias,
                      float* out, int n, int cin, int h, int w, int cout) {
  const int hout = 2 * h;
  const int wout = 2 * w;
  for (int ni = 0; ni < n; ++ni) {
    for (int co = 0; co < cout; ++co) {
      for (int oy = 0; oy < hout; ++oy) {
        for (int ox = 0; ox < wout; ++ox) {
          const int y = oy / 2;
          const int ky = oy % 2;
          const int x = ox / 2;
          const int kx = ox % 2;
          float acc = bias ? bias[co] : 0.0f;
          for (int ci = 0; ci < cin; ++ci) {
            acc += weight[(((size_t)ci * cout + co) * 2 + ky) * 2 + kx] *
                   in[((size_t)ni * cin + ci) * h * w + (size_t)y * w + x];
          }
          out[((size_t)ni * cout + co) * hout * wout + (size_t)oy * wout + ox] =
              acc;
        }
      }
    }
  }
}

void maxpool2x2_forward(const float* in, float* out, int32_t* argmax, int n,
                        int c, int h, int w) {
  const int hout = h / 2;
  const int wout = w / 2;
  for (int p = 0; p < n * c; ++p) {
    const float* iplane = in + (size_t)p * h * w;
    float* oplane = out + (size_t)p * hout * wout;
    int32_t* aplane = argmax + (size_t)p * hout * wout;
    for (int y = 0; y < hout; ++y) {
      for (int x = 0; x < wout; ++x) {
        int32_t best = (2 * y) * w + 2 * x;
        float bv = iplane[best];
        const int32_t cand[3] = {(2 * y) * w + 2 * x + 1,
                                 (2 * y + 1) * w + 2 * x,
                                 (2 * y + 1) * w + 2 * x + 1};
        for (int32_t idx : cand) {
          if (iplane[idx] > bv) {
            bv = iplane[idx];
            best = idx;
          }
        }
        oplane[(size_t)y * wout + x] = bv;
        aplane[(size_t)y * wout + x] = best;
      }
    }
  }
}

void bilinear_forward(const float* in, float* out, int n, int c, int hin,
                      int win, int hout, int wout) {
  if (hin == hout && win == wout) {
    std::memcpy(out, in, (size_t)n * c * hin * win * sizeof(float));
    return;
  }
  const float sy = (float)hin / (float)hout;
  const float sx = (float)win / (float)wout;
  for (int p = 0; p < n * c; ++p) {
    const float* iplane = in + (size_t)p * hin * win;
    float* oplane = out + (size_t)p * hout * wout;
    for (int y = 0; y < hout; ++y) {
      float fy = ((float)y + 0.5f) * sy - 0.5f;
      if (fy < 0.0f) fy = 0.0f;
      const int y0 = std::min((int)fy, hin - 1);
      const int y1 = std::min(y0 + 1, hin - 1);
      const float wy = fy - (float)y0;
      for (int x = 0; x < wout; ++x) {
        float fx = ((float)x + 0.5f) * sx - 0.5f;
        if (fx < 0.0f) fx = 0.0f;
        const int x0 = std::min((int)fx, win - 1);
        const int x1 = std::min(x0 + 1, win - 1);
        const float wx = fx - (float)x0;
        const float* r0 = iplane + (size_t)y0 * win;
        const float* r1 = iplane + (size_t)y1 * win;
        const float top = r0[x0] + wx * (r0[x1] - r0[x0]);
        const float bot = r1[x0] + wx * (r1[x1] - r1[x0]);
        oplane[(size_t)y * wout + x] = top + wy * (bot - top);
      }
    }
  }
}

void adaptive_avgpool_forward(const float* in, float* out, int n, int c, int h,
                              int w, int bh, int bw) {
  for (int p = 0; p < n * c; ++p) {
    const float* iplane = in + (size_t)p * h * w;
    float* oplane = out + (size_t)p * bh * bw;
    for (int by = 0; by < bh; ++by) {
      const int y0 = (by * h) / bh;
      const int y1 = ((by + 1) * h + bh - 1) / bh;
      for (int bx = 0; bx < bw; ++bx) {
        const int x0 = (bx * w) / bw;
        const int x1 = ((bx + 1) * w + bw - 1) / bw;
        double acc = 0.0;
        for (int y = y0; y < y1; ++y) {
          const float* irow = iplane + (size_t)y * w;
          for (int x = x0; x < x1; ++x) acc += irow[x];
        }
        oplane[(size_t)by * bw + bx] =
            (float)(acc / ((double)(y1 - y0) * (x1 - x0)));
      }
    }
  }
}

void batchnorm_forward_train(const float* in, const float* gamma,
                             const float* beta, float* out, float* save_mean,
                             float* save_invstd, float* running_mean,
                             float* running_var, float momentum, float eps,
                             int n, int c, int h, int w) {
  const size_t plane = (size_t)h * w;
  const double count = (double)n * plane;
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

}  // namespace mtnet::kernels::serial
