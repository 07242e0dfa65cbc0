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
// Independent brute-force implementations used as test oracles. These are
// deliberately written in the most direct transcription style, sharing no
// code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mtnet/data_types.hpp"
#include "mtnet/evaluation.hpp"
#include "mtnet/tensor.hpp"

namespace oracle {

// ---- losses ---------------------------------------------------------------

inline double clamp_prob(double p) {
  return std::min(1.0 - 1e-6, std::max(1e-6, p));
}

// focal loss: at y==1 pixels (1-p)^a log p, else (1-y)^b p^a log(1-p);
// summed, negated, divided by max(#keypoints, 1)
inline double focal(const std::vector<double>& pred,
                    const std::vector<double>& truth, double a, double b) {
  double sum = 0.0;
  int npos = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double p = clamp_prob(pred[i]);
    if (truth[i] == 1.0) {
      ++npos;
      sum += std::pow(1.0 - p, a) * std::log(p);
    } else {
      sum += std::pow(1.0 - truth[i], b) * std::pow(p, a) * std::log(1.0 - p);
    }
  }
  return -sum / std::max(npos, 1);
}

struct SizeTarget {
  int x, y;
  double w, h;
};

inline double size_l1(const std::vector<double>& wmap,
                      const std::vector<double>& hmap, int width,
                      const std::vector<SizeTarget>& targets) {
  if (targets.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : targets) {
    sum += std::abs(wmap[(size_t)t.y * width + t.x] - t.w);
    sum += std::abs(hmap[(size_t)t.y * width + t.x] - t.h);
  }
  return sum / (double)targets.size();
}

inline double dice(const std::vector<double>& pred,
                   const std::vector<double>& truth, double smooth) {
  double pt = 0, pp = 0, tt = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    pt += pred[i] * truth[i];
    pp += pred[i] * pred[i];
    tt += truth[i] * truth[i];
  }
  return (smooth + 2.0 * pt) / (smooth + pp + tt);
}

inline double seg_loss(const std::vector<double>& pred,
                       const std::vector<double>& truth, double smooth,
                       double w_target, double w_background) {
  std::vector<double> pc(pred.size()), tc(truth.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    pc[i] = 1.0 - pred[i];
    tc[i] = 1.0 - truth[i];
  }
  return w_target * (1.0 - dice(pred, truth, smooth)) +
         w_background * (1.0 - dice(pc, tc, smooth));
}

// ---- connected components (recursive flood fill, 8-neighborhood) ----------

inline void flood(const std::vector<uint8_t>& mask, int h, int w, int y, int x,
                  int label, std::vector<int>& labels) {
  if (y < 0 || y >= h || x < 0 || x >= w) return;
  const size_t i = (size_t)y * w + x;
  if (!mask[i] || labels[i]) return;
  labels[i] = label;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if (dy || dx) flood(mask, h, w, y + dy, x + dx, label, labels);
}

struct OracleBox {
  int x1, y1, x2, y2;
  int area;
  double cx, cy;
};

inline std::vector<OracleBox> components(const std::vector<uint8_t>& mask,
                                         int h, int w) {
  std::vector<int> labels(mask.size(), 0);
  int count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask[(size_t)y * w + x] && !labels[(size_t)y * w + x])
        flood(mask, h, w, y, x, ++count, labels);
  std::vector<OracleBox> boxes(count);
  std::vector<double> sx(count, 0), sy(count, 0);
  for (auto& b : boxes) b = {w, h, -1, -1, 0, 0, 0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = labels[(size_t)y * w + x];
      if (!l) continue;
      OracleBox& b = boxes[l - 1];
      b.x1 = std::min(b.x1, x);
      b.y1 = std::min(b.y1, y);
      b.x2 = std::max(b.x2, x);
      b.y2 = std::max(b.y2, y);
      b.area += 1;
      sx[l - 1] += x;
      sy[l - 1] += y;
    }
  for (int i = 0; i < count; ++i) {
    boxes[i].cx = sx[i] / boxes[i].area;
    boxes[i].cy = sy[i] / boxes[i].area;
  }
  return boxes;
}

// ---- average precision -----------------------------------------------------

struct ApBox {
  double x1, y1, x2, y2;
  double score = 0.0;  // unused for ground truth
};

inline double ap_iou(const ApBox& a, const ApBox& b) {
  const double ix = std::max(
      0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(
      0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double ua = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double ub = (b.x2 - b.x1) * (b.y2 - b.y1);
  const double uni = ua + ub - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// COCO-style AP at one threshold: greedy per-image matching in descending
// score order against the best still-free ground truth, one global ranking,
// 101-point interpolation. Assumes strictly distinct scores.
inline double ap_at(const std::vector<std::vector<ApBox>>& dets,
                    const std::vector<std::vector<ApBox>>& gts,
                    double threshold, int max_dets = 100) {
  int64_t total_gt = 0;
  for (const auto& g : gts) total_gt += (int64_t)g.size();
  if (total_gt == 0) return 0.0;

  struct Flagged {
    double score;
    bool tp;
  };
  std::vector<Flagged> all;
  for (size_t img = 0; img < dets.size(); ++img) {
    std::vector<ApBox> d = dets[img];
    std::sort(d.begin(), d.end(),
              [](const ApBox& a, const ApBox& b) { return a.score > b.score; });
    if ((int)d.size() > max_dets) d.resize(max_dets);
    std::vector<bool> used(gts[img].size(), false);
    for (const auto& det : d) {
      int best = -1;
      double best_iou = 0.0;
      for (size_t g = 0; g < gts[img].size(); ++g) {
        if (used[g]) continue;
        const double iou = ap_iou(det, gts[img][g]);
        if (iou >= threshold && iou > best_iou) {
          best = (int)g;
          best_iou = iou;
        }
      }
      if (best >= 0) used[best] = true;
      all.push_back({det.score, best >= 0});
    }
  }
  std::sort(all.begin(), all.end(),
            [](const Flagged& a, const Flagged& b) { return a.score > b.score; });

  // precision at each rank, then 101-point interpolation by direct scan
  const int n = (int)all.size();
  std::vector<double> prec(n), rec(n);
  int tp = 0;
  for (int i = 0; i < n; ++i) {
    if (all[i].tp) ++tp;
    prec[i] = (double)tp / (i + 1);
    rec[i] = (double)tp / (double)total_gt;
  }
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0.0;
    for (int i = 0; i < n; ++i)
      if (rec[i] >= r) best = std::max(best, prec[i]);
    sum += best;
  }
  return sum / 101.0;
}

// ---- gaussian radius rule: the three IoU cases ------------------------------

// case 1: box shifted diagonally by r (one corner moves)
inline double iou_shift(double w, double h, double r) {
  const double inter = (w - r) * (h - r);
  return inter / (2.0 * w * h - inter);
}
// case 2: box shrunk by r on every side
inline double iou_shrink(double w, double h, double r) {
  return (w - 2.0 * r) * (h - 2.0 * r) / (w * h);
}
// case 3: box grown by r on every side
inline double iou_grow(double w, double h, double r) {
  return w * h / ((w + 2.0 * r) * (h + 2.0 * r));
}

}  // namespace oracle
