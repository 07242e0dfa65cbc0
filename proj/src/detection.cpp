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
#include "mtnet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtnet {

namespace {
constexpr double kHeatmapEps = 1e-6;
constexpr double kSigmaFloor = 0.6;
// focal-loss prior: initialize the heatmap logit bias so sigmoid ~ 0.1
constexpr float kHeatmapBiasInit = -2.19f;
}  // namespace

DetectionHead::DetectionHead(int feature_channels, int head_width,
                             bool predict_offset)
    : hm_conv(feature_channels, head_width, 3, 1),
      hm_out(head_width, 1, 1, 0, true),
      size_conv(feature_channels, head_width, 3, 1),
      size_out(head_width, 2, 1, 0, true),
      has_offset(predict_offset) {
  if (has_offset) {
    off_conv = nn::ConvReLU(feature_channels, head_width, 3, 1);
    off_out = nn::Conv2d(head_width, 2, 1, 0, true);
  }
}

void DetectionHead::init(std::mt19937& rng) {
  hm_conv.init(rng);
  hm_out.init(rng);
  for (auto& v : hm_out.bias.data) v = kHeatmapBiasInit;
  size_conv.init(rng);
  size_out.init(rng);
  if (has_offset) {
    off_conv.init(rng);
    off_out.init(rng);
  }
}

void DetectionHead::set_training(bool t) {
  hm_conv.set_training(t);
  hm_out.training = t;
  hm_sigmoid.training = t;
  size_conv.set_training(t);
  size_out.training = t;
  if (has_offset) {
    off_conv.set_training(t);
    off_out.training = t;
  }
}

DetectionOutputs DetectionHead::forward(const Tensor& feature) {
  DetectionOutputs out;
  out.heatmap = hm_sigmoid.forward(hm_out.forward(hm_conv.forward(feature)));
  out.size = size_out.forward(size_conv.forward(feature));
  if (has_offset) {
    out.offset = off_out.forward(off_conv.forward(feature));
    out.has_offset = true;
  }
  return out;
}

Tensor DetectionHead::backward(const Tensor& gheatmap, const Tensor& gsize) {
  Tensor gf =
      hm_conv.backward(hm_out.backward(hm_sigmoid.backward(gheatmap)));
  add_inplace(gf, size_conv.backward(size_out.backward(gsize)));
  // the offset branch carries no loss, so no gradient flows through it
  return gf;
}

void DetectionHead::collect_params(const std::string& p, nn::ParamList& out) {
  hm_conv.collect_params(p + ".hm_conv", out);
  hm_out.collect_params(p + ".hm_out", out);
  size_conv.collect_params(p + ".size_conv", out);
  size_out.collect_params(p + ".size_out", out);
  if (has_offset) {
    off_conv.collect_params(p + ".off_conv", out);
    off_out.collect_params(p + ".off_out", out);
  }
}

void DetectionHead::collect_state(const std::string& p, nn::StateList& out) {
  hm_conv.collect_state(p + ".hm_conv", out);
  hm_out.collect_state(p + ".hm_out", out);
  size_conv.collect_state(p + ".size_conv", out);
  size_out.collect_state(p + ".size_out", out);
  if (has_offset) {
    off_conv.collect_state(p + ".off_conv", out);
    off_out.collect_state(p + ".off_out", out);
  }
}

int64_t DetectionHead::param_count() {
  nn::ParamList params;
  collect_params("det", params);
  int64_t total = 0;
  for (const auto& p : params) total += p.value->size();
  return total;
}

double gaussian_radius_sigma(double box_w, double box_h, double min_overlap) {
  if (box_w <= 0.0 || box_h <= 0.0)
    throw std::invalid_argument("gaussian_radius: box size must be positive");
  if (!(min_overlap > 0.0 && min_overlap < 1.0))
    throw std::invalid_argument("gaussian_radius: min_overlap must be in (0,1)");
  const double w = box_w, h = box_h, o = min_overlap;

  // detection shifted diagonally by r, same size
  const double b1 = h + w;
  const double c1 = w * h * (1.0 - o) / (1.0 + o);
  const double r1 = (b1 - std::sqrt(b1 * b1 - 4.0 * c1)) / 2.0;

  // detection shrunk by r on every side
  const double b2 = 2.0 * (h + w);
  const double c2 = (1.0 - o) * w * h;
  const double r2 = (b2 - std::sqrt(b2 * b2 - 16.0 * c2)) / 8.0;

  // detection grown by r on every side
  const double a3 = 4.0 * o;
  const double b3 = -2.0 * o * (h + w);
  const double c3 = (o - 1.0) * w * h;
  const double r3 = (-b3 + std::sqrt(b3 * b3 - 4.0 * a3 * c3)) / (2.0 * a3);

  const double radius = std::max(0.0, std::min({r1, r2, r3}));
  return std::max(radius / 3.0, kSigmaFloor);
}

void draw_gaussian(Tensor& plane, int plane_n, int cx, int cy, double sigma) {
  const int h = plane.h, w = plane.w;
  const int r = (int)std::ceil(3.0 * sigma);
  const double denom = 2.0 * sigma * sigma;
  for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y) {
    for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
      const double d2 = (double)(x - cx) * (x - cx) + (double)(y - cy) * (y - cy);
      const float v = (float)std::exp(-d2 / denom);
      float& cell = plane.at(plane_n, 0, y, x);
      if (v > cell) cell = v;
    }
  }
}

DetectionTargets encode_targets(const std::vector<BoxAnnotation>& boxes, int h,
                                int w, float min_overlap) {
  DetectionTargets t;
  t.heatmap = Tensor(1, 1, h, w);
  t.keypoints.reserve(boxes.size());
  for (const auto& b : boxes) {
    if (b.x1 < 0 || b.y1 < 0 || b.x2 >= w || b.y2 >= h || b.x2 < b.x1 ||
        b.y2 < b.y1)
      throw std::invalid_argument(
          "encode_targets: box (" + std::to_string(b.x1) + "," +
          std::to_string(b.y1) + "," + std::to_string(b.x2) + "," +
          std::to_string(b.y2) + ") outside " + std::to_string(w) + "x" +
          std::to_string(h) + " image");
    Keypoint kp;
    kp.w = (float)b.pixel_w();
    kp.h = (float)b.pixel_h();
    // continuous center of the inclusive-corner box, floored to a pixel
    kp.x = (b.x1 + b.x2 + 1) / 2;
    kp.y = (b.y1 + b.y2 + 1) / 2;
    const double sigma = gaussian_radius_sigma(kp.w, kp.h, min_overlap);
    draw_gaussian(t.heatmap, 0, kp.x, kp.y, sigma);
    t.heatmap.at(0, 0, kp.y, kp.x) = 1.0f;
    t.keypoints.push_back(kp);
  }
  return t;
}

double focal_loss(const Tensor& pred, const Tensor& target, float alpha,
                  float beta, Tensor* grad) {
  check_same_shape(pred, target, "focal_loss");
  if (grad) {
    *grad = Tensor(pred.n, pred.c, pred.h, pred.w);
  }
  int n_pos = 0;
  double loss = 0.0;
  const double a = alpha, b = beta;
  for (int64_t i = 0; i < pred.size(); ++i) {
    const double yt = target.data[i];
    const double yp =
        std::clamp((double)pred.data[i], kHeatmapEps, 1.0 - kHeatmapEps);
    if (yt == 1.0) {
      ++n_pos;
      loss += -std::pow(1.0 - yp, a) * std::log(yp);
      if (grad)
        grad->data[i] = (float)(a * std::pow(1.0 - yp, a - 1.0) * std::log(yp) -
                                std::pow(1.0 - yp, a) / yp);
    } else {
      const double wneg = std::pow(1.0 - yt, b);
      loss += -wneg * std::pow(yp, a) * std::log(1.0 - yp);
      if (grad)
        grad->data[i] =
            (float)(wneg * (-a * std::pow(yp, a - 1.0) * std::log(1.0 - yp) +
                            std::pow(yp, a) / (1.0 - yp)));
    }
  }
  const double norm = std::max(n_pos, 1);
  if (grad)
    for (auto& g : grad->data) g /= (float)norm;
  return loss / norm;
}

double size_loss(const Tensor& size_map, const std::vector<Keypoint>& kps,
                 Tensor* grad) {
  if (size_map.c != 2)
    throw std::invalid_argument("size_loss: size map must have 2 channels");
  if (grad && !grad->same_shape(size_map))
    *grad = Tensor(size_map.n, size_map.c, size_map.h, size_map.w);
  if (kps.empty()) return 0.0;
  double loss = 0.0;
  for (const auto& kp : kps) {
    if (kp.x < 0 || kp.x >= size_map.w || kp.y < 0 || kp.y >= size_map.h)
      throw std::invalid_argument("size_loss: keypoint (" +
                                  std::to_string(kp.x) + "," +
                                  std::to_string(kp.y) + ") outside map");
    const double dw = (double)size_map.at(0, 0, kp.y, kp.x) - kp.w;
    const double dh = (double)size_map.at(0, 1, kp.y, kp.x) - kp.h;
    loss += std::abs(dw) + std::abs(dh);
    if (grad) {
      const float gn = 1.0f / (float)kps.size();
      grad->at(0, 0, kp.y, kp.x) += (dw > 0.0 ? gn : (dw < 0.0 ? -gn : 0.0f));
      grad->at(0, 1, kp.y, kp.x) += (dh > 0.0 ? gn : (dh < 0.0 ? -gn : 0.0f));
    }
  }
  return loss / (double)kps.size();
}

DetLossReport detection_loss(const DetectionOutputs& outputs,
                             const std::vector<DetectionTargets>& targets,
                             const ModelConfig& cfg, Tensor* gheatmap,
                             Tensor* gsize) {
  const int batch = outputs.heatmap.n;
  if ((int)targets.size() != batch)
    throw std::invalid_argument("detection_loss: batch size mismatch");
  if (gheatmap)
    *gheatmap = Tensor(batch, 1, outputs.heatmap.h, outputs.heatmap.w);
  if (gsize) *gsize = Tensor(batch, 2, outputs.size.h, outputs.size.w);

  DetLossReport rep;
  double lk_sum = 0.0, lsize_sum = 0.0;
  const size_t hm_plane = (size_t)outputs.heatmap.h * outputs.heatmap.w;
  const size_t size_plane = 2 * hm_plane;
  for (int i = 0; i < batch; ++i) {
    // per-image views copied out so the single-image losses apply verbatim
    Tensor hm_i(1, 1, outputs.heatmap.h, outputs.heatmap.w);
    std::copy_n(outputs.heatmap.ptr() + (size_t)i * hm_plane, hm_plane,
                hm_i.ptr());
    Tensor ghm_i;
    lk_sum += focal_loss(hm_i, targets[i].heatmap, cfg.focal_alpha,
                         cfg.focal_beta, gheatmap ? &ghm_i : nullptr);

    Tensor sz_i(1, 2, outputs.size.h, outputs.size.w);
    std::copy_n(outputs.size.ptr() + (size_t)i * size_plane, size_plane,
                sz_i.ptr());
    Tensor gsz_i(1, 2, outputs.size.h, outputs.size.w);
    lsize_sum += size_loss(sz_i, targets[i].keypoints, gsize ? &gsz_i : nullptr);

    rep.n_keypoints += (int)targets[i].keypoints.size();
    if (gheatmap)
      for (size_t k = 0; k < hm_plane; ++k)
        gheatmap->data[(size_t)i * hm_plane + k] = ghm_i.data[k] / (float)batch;
    if (gsize)
      for (size_t k = 0; k < size_plane; ++k)
        gsize->data[(size_t)i * size_plane + k] = gsz_i.data[k] / (float)batch;
  }
  rep.l_k = lk_sum / batch;
  rep.l_size = lsize_sum / batch;
  rep.l_det = rep.l_k + (double)cfg.lambda_size * rep.l_size;
  if (gsize) {
    const float ls = cfg.lambda_size;
    for (auto& g : gsize->data) g *= ls;
  }
  return rep;
}

}  // namespace mtnet
