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
#include "mtnet/model.hpp"

#include <stdexcept>

namespace mtnet {

TotalLossReport total_loss(const DetLossReport* det, const SegLossReport* seg,
                           double lambda_det, double lambda_seg) {
  if (!det && !seg)
    throw std::invalid_argument("total_loss: no task loss present");
  TotalLossReport rep;
  rep.l_det = det ? det->l_det : 0.0;
  rep.l_seg = seg ? seg->l_seg : 0.0;
  rep.l_all = lambda_det * rep.l_det + lambda_seg * rep.l_seg;
  return rep;
}

Model::Model(const ModelConfig& cfg)
    : cfg(cfg),
      backbone(cfg),
      has_det(cfg.mode != TaskMode::kSegOnly),
      has_seg(cfg.mode != TaskMode::kDetOnly) {
  if (has_det)
    det_head =
        DetectionHead(cfg.feature_channels, cfg.head_width, cfg.predict_offset);
  if (has_seg)
    seg_head = SegmentationHead(cfg.feature_channels, cfg.psp_bin_channels);
}

void Model::init(uint64_t seed) {
  std::mt19937 rng((uint32_t)(seed ^ (seed >> 32)));
  backbone.init(rng);
  if (has_det) det_head.init(rng);
  if (has_seg) seg_head.init(rng);
}

void Model::set_training(bool t) {
  backbone.set_training(t);
  if (has_det) det_head.set_training(t);
  if (has_seg) seg_head.set_training(t);
}

ModelOutputs Model::forward(const Tensor& images) {
  Tensor feature = backbone.forward(images);
  ++backbone_invocations;
  ModelOutputs out;
  if (has_det) {
    out.det = det_head.forward(feature);
    out.has_det = true;
  }
  if (has_seg) {
    out.seg_probs = seg_head.forward(feature);
    out.has_seg = true;
  }
  return out;
}

Tensor Model::backward(const Tensor* gheatmap, const Tensor* gsize,
                       const Tensor* gseg_probs) {
  if ((gheatmap || gsize) && !has_det)
    throw std::logic_error("model: detection gradient without detection head");
  if (gseg_probs && !has_seg)
    throw std::logic_error(
        "model: segmentation gradient without segmentation head");
  Tensor gfeature;
  if (gheatmap && gsize) gfeature = det_head.backward(*gheatmap, *gsize);
  if (gseg_probs) {
    Tensor gs = seg_head.backward(*gseg_probs);
    if (gfeature.empty())
      gfeature = std::move(gs);
    else
      add_inplace(gfeature, gs);
  }
  if (gfeature.empty())
    throw std::invalid_argument("model backward: no gradients given");
  return backbone.backward(gfeature);
}

void Model::collect_params(nn::ParamList& out) {
  backbone.collect_params("backbone", out);
  if (has_det) det_head.collect_params("det_head", out);
  if (has_seg) seg_head.collect_params("seg_head", out);
}

void Model::collect_state(nn::StateList& out) {
  backbone.collect_state("backbone", out);
  if (has_det) det_head.collect_state("det_head", out);
  if (has_seg) seg_head.collect_state("seg_head", out);
}

int64_t Model::param_count() {
  nn::ParamList params;
  collect_params(params);
  return count_params(params);
}

void Model::zero_grad() {
  nn::ParamList params;
  collect_params(params);
  for (auto& p : params) p.grad->zero();
}

}  // namespace mtnet
