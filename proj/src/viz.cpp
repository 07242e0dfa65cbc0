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
#include "mtnet/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mtnet/png_io.hpp"

namespace mtnet {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

Rgb confidence_color(double score) {
  if (score >= 0.7) return {0, 200, 0};
  if (score >= 0.4) return {230, 200, 0};
  return {220, 0, 0};
}

void put(std::vector<uint8_t>& rgb, int w, int x, int y, Rgb c) {
  const size_t i = 3 * ((size_t)y * w + x);
  rgb[i] = c.r;
  rgb[i + 1] = c.g;
  rgb[i + 2] = c.b;
}

}  // namespace

std::vector<uint8_t> render_overlay(const Tensor& image, int n,
                                    const std::vector<uint8_t>& pred_mask,
                                    const std::vector<Detection>& detections) {
  const int h = image.h, w = image.w;
  if (!pred_mask.empty() && (int64_t)pred_mask.size() != (int64_t)h * w)
    throw std::invalid_argument("overlay: mask size mismatch");
  std::vector<uint8_t> rgb(3 * (size_t)h * (size_t)w);
  const float* plane =
      image.ptr() + (size_t)n * image.c * image.h * image.w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float v = std::clamp(plane[(size_t)y * w + x], 0.0f, 1.0f);
      const uint8_t g = (uint8_t)std::lround(v * 255.0f);
      put(rgb, w, x, y, {g, g, g});
    }
  }
  for (size_t i = 0; i < pred_mask.size(); ++i)
    if (pred_mask[i]) {
      rgb[3 * i] = 0;
      rgb[3 * i + 1] = 0;
      rgb[3 * i + 2] = 255;
    }
  for (const auto& d : detections) {
    const Rgb c = confidence_color(d.score);
    const int x1 = std::clamp((int)std::floor(d.x1), 0, w - 1);
    const int y1 = std::clamp((int)std::floor(d.y1), 0, h - 1);
    const int x2 = std::clamp((int)std::ceil(d.x2) - 1, 0, w - 1);
    const int y2 = std::clamp((int)std::ceil(d.y2) - 1, 0, h - 1);
    for (int x = x1; x <= x2; ++x) {
      put(rgb, w, x, y1, c);
      put(rgb, w, x, y2, c);
    }
    for (int y = y1; y <= y2; ++y) {
      put(rgb, w, x1, y, c);
      put(rgb, w, x2, y, c);
    }
  }
  return rgb;
}

void write_overlay_png(const std::string& path, const Tensor& image, int n,
                       const std::vector<uint8_t>& pred_mask,
                       const std::vector<Detection>& detections) {
  write_png_rgb(path, image.w, image.h,
                render_overlay(image, n, pred_mask, detections));
}

void write_pr_curve_svg(const std::string& path, const PrCurve& curve) {
  const int W = 480, H = 480, M = 50;  // canvas and margin
  const double sx = W - 2 * M, sy = H - 2 * M;
  auto px = [&](double recall) { return M + recall * sx; };
  auto py = [&](double precision) { return H - M - precision * sy; };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write plot file " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    f << "<line x1=\"" << px(t) << "\" y1=\"" << py(0) << "\" x2=\"" << px(t)
      << "\" y2=\"" << py(1) << "\" stroke=\"#dddddd\"/>\n";
    f << "<line x1=\"" << px(0) << "\" y1=\"" << py(t) << "\" x2=\"" << px(1)
      << "\" y2=\"" << py(t) << "\" stroke=\"#dddddd\"/>\n";
  }
  f << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
    << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0)
    << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"14\">recall</text>\n";
  f << "<text x=\"14\" y=\"" << H / 2
    << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 14 "
    << H / 2 << ")\">precision</text>\n";

  if (!curve.recall.empty()) {
    f << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" "
         "points=\"";
    f << px(0) << "," << py(curve.precision.front()) << " ";
    for (size_t i = 0; i < curve.recall.size(); ++i)
      f << px(curve.recall[i]) << "," << py(curve.precision[i]) << " ";
    f << "\"/>\n";
  }
  f << "</svg>\n";
}

}  // namespace mtnet
