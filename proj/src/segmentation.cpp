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
#include "mtnet/segmentation.hpp"

#include <cstring>
#include <stdexcept>

namespace mtnet {

SegmentationHead::SegmentationHead(int feature_channels, int psp_bin_channels)
    : fuse(feature_channels + 4 * psp_bin_channels, feature_channels, 3, 1),
      out_conv(feature_channels, 1, 1, 0, true),
      feature_channels(feature_channels),
      bin_channels(psp_bin_channels) {
  for (size_t i = 0; i < kBins.size(); ++i) {
    pools[i] = nn::AdaptiveAvgPool(kBins[i], kBins[i]);
    bin_convs[i] = nn::ConvBNReLU(feature_channels, psp_bin_channels, 1, 0);
  }
}

void SegmentationHead::init(std::mt19937& rng) {
  for (auto& c : bin_convs) c.init(rng);
  fuse.init(rng);
  out_conv.init(rng);
}

void SegmentationHead::set_training(bool t) {
  for (auto& c : bin_convs) c.set_training(t);
  fuse.set_training(t);
  out_conv.training = t;
  out_sigmoid.training = t;
}

Tensor SegmentationHead::forward(const Tensor& feature) {
  if (feature.c != feature_channels)
    throw std::invalid_argument("segmentation head: expected " +
                                std::to_string(feature_channels) +
                                " channels, got " + std::to_string(feature.c));
  if (feature.h < kBins.back() || feature.w < kBins.back())
    throw std::invalid_argument(
        "segmentation head: input " + std::to_string(feature.h) + "x" +
        std::to_string(feature.w) + " smaller than the largest pooling bin (" +
        std::to_string(kBins.back()) + ")");
  Tensor cat = feature;
  for (size_t i = 0; i < kBins.size(); ++i) {
    Tensor b = bin_convs[i].forward(pools[i].forward(feature));
    cat = nn::concat_channels(cat, bin_ups[i].forward(b, feature.h, feature.w));
  }
  return out_sigmoid.forward(out_conv.forward(fuse.forward(cat)));
}

Tensor SegmentationHead::backward(const Tensor& gprobs) {
  Tensor gcat = fuse.backward(out_conv.backward(out_sigmoid.backward(gprobs)));
  // slice the concat gradient back into [feature | bin0..bin3]
  Tensor gfeature(gcat.n, feature_channels, gcat.h, gcat.w);
  const size_t plane = (size_t)gcat.h * gcat.w;
  for (int ni = 0; ni < gcat.n; ++ni)
    std::memcpy(gfeature.ptr() + (size_t)ni * feature_channels * plane,
                gcat.ptr() + (size_t)ni * gcat.c * plane,
                (size_t)feature_channels * plane * sizeof(float));
  for (size_t i = 0; i < kBins.size(); ++i) {
    Tensor gbin(gcat.n, bin_channels, gcat.h, gcat.w);
    for (int ni = 0; ni < gcat.n; ++ni)
      std::memcpy(
          gbin.ptr() + (size_t)ni * bin_channels * plane,
          gcat.ptr() +
              ((size_t)ni * gcat.c + feature_channels + i * bin_channels) *
                  plane,
          (size_t)bin_channels * plane * sizeof(float));
    add_inplace(gfeature, pools[i].backward(bin_convs[i].backward(
                              bin_ups[i].backward(gbin))));
  }
  return gfeature;
}

void SegmentationHead::collect_params(const std::string& p,
                                      nn::ParamList& out) {
  for (size_t i = 0; i < kBins.size(); ++i)
    bin_convs[i].collect_params(p + ".bin" + std::to_string(kBins[i]), out);
  fuse.collect_params(p + ".fuse", out);
  out_conv.collect_params(p + ".out", out);
}

void SegmentationHead::collect_state(const std::string& p,
                                     nn::StateList& out) {
  for (size_t i = 0; i < kBins.size(); ++i)
    bin_convs[i].collect_state(p + ".bin" + std::to_string(kBins[i]), out);
  fuse.collect_state(p + ".fuse", out);
  out_conv.collect_state(p + ".out", out);
}

int64_t SegmentationHead::param_count() {
  nn::ParamList params;
  collect_params("seg", params);
  int64_t total = 0;
  for (const auto& p : params) total += p.value->size();
  return total;
}

double dice_smooth(const Tensor& pred, const std::vector<uint8_t>& truth,
                   double smooth, Tensor* grad) {
  if ((size_t)pred.size() != truth.size())
    throw std::invalid_argument("dice_smooth: prediction has " +
                                std::to_string(pred.size()) +
                                " pixels, mask has " +
                                std::to_string(truth.size()));
  double num = smooth, den = smooth;
  for (int64_t i = 0; i < pred.size(); ++i) {
    const double yp = pred.data[i];
    const double yt = truth[i] ? 1.0 : 0.0;
    num += 2.0 * yt * yp;
    den += yt * yt + yp * yp;
  }
  const double dice = num / den;
  if (grad) {
    *grad = Tensor(pred.n, pred.c, pred.h, pred.w);
    const double d2 = den * den;
    for (int64_t i = 0; i < pred.size(); ++i) {
      const double yp = pred.data[i];
      const double yt = truth[i] ? 1.0 : 0.0;
      grad->data[i] = (float)((2.0 * yt * den - num * 2.0 * yp) / d2);
    }
  }
  return dice;
}

SegLossReport segmentation_loss(const Tensor& probs,
                                const std::vector<uint8_t>& mask,
                                const ModelConfig& cfg, Tensor* gprobs) {
  SegLossReport rep;
  Tensor gt;
  rep.dice_target =
      dice_smooth(probs, mask, cfg.dice_smooth, gprobs ? &gt : nullptr);

  Tensor comp(probs.n, probs.c, probs.h, probs.w);
  for (int64_t i = 0; i < probs.size(); ++i)
    comp.data[i] = 1.0f - probs.data[i];
  std::vector<uint8_t> mask_comp(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) mask_comp[i] = mask[i] ? 0 : 1;
  Tensor gb;
  rep.dice_background =
      dice_smooth(comp, mask_comp, cfg.dice_smooth, gprobs ? &gb : nullptr);

  const double wt = cfg.seg_weight_target, wb = cfg.seg_weight_background;
  rep.l_seg = wt * (1.0 - rep.dice_target) + wb * (1.0 - rep.dice_background);
  if (gprobs) {
    *gprobs = Tensor(probs.n, probs.c, probs.h, probs.w);
    for (int64_t i = 0; i < probs.size(); ++i)
      gprobs->data[i] = (float)(-wt * gt.data[i] + wb * gb.data[i]);
  }
  return rep;
}

SegLossReport segmentation_loss_batch(
    const Tensor& probs, const std::vector<const std::vector<uint8_t>*>& masks,
    const ModelConfig& cfg, Tensor* gprobs) {
  const int batch = probs.n;
  if ((int)masks.size() != batch)
    throw std::invalid_argument("segmentation_loss: batch size mismatch");
  if (gprobs) *gprobs = Tensor(batch, 1, probs.h, probs.w);
  SegLossReport rep;
  const size_t plane = (size_t)probs.h * probs.w;
  for (int i = 0; i < batch; ++i) {
    Tensor p_i(1, 1, probs.h, probs.w);
    std::copy_n(probs.ptr() + (size_t)i * plane, plane, p_i.ptr());
    Tensor g_i;
    SegLossReport r = segmentation_loss(p_i, *masks[i], cfg,
                                        gprobs ? &g_i : nullptr);
    rep.dice_target += r.dice_target;
    rep.dice_background += r.dice_background;
    rep.l_seg += r.l_seg;
    if (gprobs)
      for (size_t k = 0; k < plane; ++k)
        gprobs->data[(size_t)i * plane + k] = g_i.data[k] / (float)batch;
  }
  rep.dice_target /= batch;
  rep.dice_background /= batch;
  rep.l_seg /= batch;
  return rep;
}

}  // namespace mtnet
