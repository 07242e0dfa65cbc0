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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtnet {

/// Dense NCHW float32 tensor. Contiguous row-major storage; the only tensor
/// type the kernels operate on.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, float fill = 0.0f)
      : n(n_), c(c_), h(h_), w(w_) {
    if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0) {
      throw std::invalid_argument("Tensor: all dims must be positive, got " +
                                  shape_str(n_, c_, h_, w_));
    }
    data.assign(static_cast<size_t>(n_) * c_ * h_ * w_, fill);
  }

  int64_t size() const { return static_cast<int64_t>(n) * c * h * w; }
  bool empty() const { return data.empty(); }

  float* ptr() { return data.data(); }
  const float* ptr() const { return data.data(); }

  size_t index(int in, int ic, int iy, int ix) const {
    return ((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix;
  }
  float& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
  float at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape() const { return shape_str(n, c, h, w); }

  void zero() { std::fill(data.begin(), data.end(), 0.0f); }

  bool all_finite() const {
    for (float v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  static std::string shape_str(int n, int c, int h, int w) {
    return std::to_string(n) + "x" + std::to_string(c) + "x" +
           std::to_string(h) + "x" + std::to_string(w);
  }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(where) + ": shape mismatch " +
                                a.shape() + " vs " + b.shape());
  }
}

inline void add_inplace(Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add_inplace");
  for (int64_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

inline Tensor randn(int n, int c, int h, int w, std::mt19937& rng, float stddev = 1.0f) {
  Tensor t(n, c, h, w);
  std::normal_distribution<float> dist(0.0f, stddev);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

inline Tensor rand_uniform(int n, int c, int h, int w, std::mt19937& rng,
                           float lo = 0.0f, float hi = 1.0f) {
  Tensor t(n, c, h, w);
  std::uniform_real_distribution<float> dist(lo, hi);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

}  // namespace mtnet
