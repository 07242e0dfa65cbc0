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
#include "mtnet/postprocess.hpp"

#include <algorithm>
#include <stdexcept>

namespace mtnet {

std::vector<Peak> extract_peaks(const Tensor& heatmap, int n, int top_k,
                                float score_threshold) {
  if (top_k <= 0)
    throw std::invalid_argument("extract_peaks: top_k must be positive");
  const int h = heatmap.h, w = heatmap.w;
  std::vector<Peak> peaks;
  for (int ci = 0; ci < heatmap.c; ++ci) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float v = heatmap.at(n, ci, y, x);
        if (v < score_threshold) continue;
        bool is_peak = true;
        for (int dy = -1; dy <= 1 && is_peak; ++dy) {
          for (int dx = -1; dx <= 1 && is_peak; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int qy = y + dy, qx = x + dx;
            if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
            const float q = heatmap.at(n, ci, qy, qx);
            // plateau ties go to the first pixel in scan order
            if (q > v || (q == v && (qy < y || (qy == y && qx < x))))
              is_peak = false;
          }
        }
        if (is_peak) peaks.push_back({x, y, ci, v});
      }
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if ((int)peaks.size() > top_k) peaks.resize(top_k);
  return peaks;
}

std::vector<Detection> assemble_boxes(const std::vector<Peak>& peaks,
                                      const Tensor& size_map, int n,
                                      int image_h, int image_w) {
  std::vector<Detection> dets;
  dets.reserve(peaks.size());
  for (const auto& p : peaks) {
    if (p.x < 0 || p.x >= size_map.w || p.y < 0 || p.y >= size_map.h)
      throw std::invalid_argument("assemble_boxes: peak outside size map");
    const double bw = std::max(1.0, (double)size_map.at(n, 0, p.y, p.x));
    const double bh = std::max(1.0, (double)size_map.at(n, 1, p.y, p.x));
    Detection d;
    d.x1 = std::max(0.0, p.x - bw / 2.0);
    d.y1 = std::max(0.0, p.y - bh / 2.0);
    d.x2 = std::min((double)image_w, p.x + bw / 2.0);
    d.y2 = std::min((double)image_h, p.y + bh / 2.0);
    d.score = p.score;
    d.class_id = p.class_id;
    dets.push_back(d);
  }
  return dets;
}

std::vector<Detection> decode_detections(const Tensor& heatmap,
                                         const Tensor& size_map, int n,
                                         const PostprocessConfig& cfg) {
  return assemble_boxes(
      extract_peaks(heatmap, n, cfg.top_k, cfg.score_threshold), size_map, n,
      heatmap.h, heatmap.w);
}

std::vector<uint8_t> binarize_mask(const Tensor& probs, int n,
                                   float threshold) {
  std::vector<uint8_t> mask((size_t)probs.h * probs.w);
  const float* p = probs.ptr() + (size_t)n * probs.c * probs.h * probs.w;
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = p[i] > threshold ? 1 : 0;
  return mask;
}

}  // namespace mtnet
