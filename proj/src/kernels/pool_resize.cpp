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
#include <cmath>
#include <cstring>
#include <vector>

#include "mtnet/kernels.hpp"

namespace mtnet::kernels {

void maxpool2x2_forward(const float* in, float* out, int32_t* argmax, int n,
                        int c, int h, int w) {
  const int hout = h / 2;
  const int wout = w / 2;
  const int planes = n * c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
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

void maxpool2x2_backward(const float* gout, const int32_t* argmax, float* gin,
                         int n, int c, int h, int w) {
  const int hout = h / 2;
  const int wout = w / 2;
  const int planes = n * c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const float* goplane = gout + (size_t)p * hout * wout;
    const int32_t* aplane = argmax + (size_t)p * hout * wout;
    float* giplane = gin + (size_t)p * h * w;
    std::fill(giplane, giplane + (size_t)h * w, 0.0f);
    for (size_t i = 0; i < (size_t)hout * wout; ++i)
      giplane[aplane[i]] += goplane[i];
  }
}

namespace {

// half-pixel source coordinate, clamped like torch's align_corners=false
struct Lerp {
  int lo, hi;
  float whi;
};

std::vector<Lerp> make_lerp(int out, int in) {
  std::vector<Lerp> t(out);
  const float scale = (float)in / (float)out;
  for (int o = 0; o < out; ++o) {
    float src = ((float)o + 0.5f) * scale - 0.5f;
    if (src < 0.0f) src = 0.0f;
    const int lo = std::min((int)src, in - 1);
    t[o].lo = lo;
    t[o].hi = std::min(lo + 1, in - 1);
    t[o].whi = src - (float)lo;
  }
  return t;
}

}  // namespace

void bilinear_forward(const float* in, float* out, int n, int c, int hin,
                      int win, int hout, int wout) {
  if (hin == hout && win == wout) {
    std::memcpy(out, in, (size_t)n * c * hin * win * sizeof(float));
    return;
  }
  const auto ty = make_lerp(hout, hin);
  const auto tx = make_lerp(wout, win);
  const int planes = n * c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const float* iplane = in + (size_t)p * hin * win;
    float* oplane = out + (size_t)p * hout * wout;
    for (int y = 0; y < hout; ++y) {
      const float* r0 = iplane + (size_t)ty[y].lo * win;
      const float* r1 = iplane + (size_t)ty[y].hi * win;
      const float fy = ty[y].whi;
      float* orow = oplane + (size_t)y * wout;
      for (int x = 0; x < wout; ++x) {
        const float fx = tx[x].whi;
        const float top = r0[tx[x].lo] + fx * (r0[tx[x].hi] - r0[tx[x].lo]);
        const float bot = r1[tx[x].lo] + fx * (r1[tx[x].hi] - r1[tx[x].lo]);
        orow[x] = top + fy * (bot - top);
      }
    }
  }
}

void bilinear_backward(const float* gout, float* gin, int n, int c, int hin,
                       int win, int hout, int wout) {
  if (hin == hout && win == wout) {
    std::memcpy(gin, gout, (size_t)n * c * hin * win * sizeof(float));
    return;
  }
  const auto ty = make_lerp(hout, hin);
  const auto tx = make_lerp(wout, win);
  const int planes = n * c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const float* goplane = gout + (size_t)p * hout * wout;
    float* giplane = gin + (size_t)p * hin * win;
    std::fill(giplane, giplane + (size_t)hin * win, 0.0f);
    for (int y = 0; y < hout; ++y) {
      const float fy = ty[y].whi;
      float* r0 = giplane + (size_t)ty[y].lo * win;
      float* r1 = giplane + (size_t)ty[y].hi * win;
      const float* gorow = goplane + (size_t)y * wout;
      for (int x = 0; x < wout; ++x) {
        const float fx = tx[x].whi;
        const float g = gorow[x];
        r0[tx[x].lo] += (1.0f - fy) * (1.0f - fx) * g;
        r0[tx[x].hi] += (1.0f - fy) * fx * g;
        r1[tx[x].lo] += fy * (1.0f - fx) * g;
        r1[tx[x].hi] += fy * fx * g;
      }
    }
  }
}

void adaptive_avgpool_forward(const float* in, float* out, int n, int c, int h,
                              int w, int bh, int bw) {
  const int planes = n * c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
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

void adaptive_avgpool_backward(const float* gout, float* gin, int n, int c,
                               int h, int w, int bh, int bw) {
  const int planes = n * c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const float* goplane = gout + (size_t)p * bh * bw;
    float* giplane = gin + (size_t)p * h * w;
    std::fill(giplane, giplane + (size_t)h * w, 0.0f);
    for (int by = 0; by < bh; ++by) {
      const int y0 = (by * h) / bh;
      const int y1 = ((by + 1) * h + bh - 1) / bh;
      for (int bx = 0; bx < bw; ++bx) {
        const int x0 = (bx * w) / bw;
        const int x1 = ((bx + 1) * w + bw - 1) / bw;
        const float g = goplane[(size_t)by * bw + bx] /
                        (float)((y1 - y0) * (x1 - x0));
        for (int y = y0; y < y1; ++y) {
          float* girow = giplane + (size_t)y * w;
          for (int x = x0; x < x1; ++x) girow[x] += g;
        }
      }
    }
  }
}

}  // namespace mtnet::kernels
