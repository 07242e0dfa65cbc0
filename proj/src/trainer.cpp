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
#include "mtnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mtnet/checkpoint.hpp"
#include "mtnet/postprocess.hpp"

#ifndef MTNET_SOURCE_REV
#define MTNET_SOURCE_REV "unknown"
#endif

namespace fs = std::filesystem;

namespace mtnet {

void SGD::attach(const nn::ParamList& params) {
  velocity.clear();
  velocity.reserve(params.size());
  for (const auto& p : params) {
    Tensor v(p.value->n, p.value->c, p.value->h, p.value->w);
    v.zero();
    velocity.push_back(std::move(v));
  }
}

void SGD::step(nn::ParamList& params) {
  if (velocity.size() != params.size())
    throw std::logic_error("optimizer not attached to this parameter list");
  const float flr = (float)lr, fmu = (float)momentum;
  for (size_t i = 0; i < params.size(); ++i) {
    float* w = params[i].value->ptr();
    const float* g = params[i].grad->ptr();
    float* v = velocity[i].ptr();
    const int64_t n = params[i].value->size();
    const float fwd = params[i].decay ? (float)weight_decay : 0.0f;
#pragma omp parallel for schedule(static)
    for (int64_t e = 0; e < n; ++e) {
      const float grad = g[e] + fwd * w[e];
      v[e] = fmu * v[e] + grad;
      w[e] -= flr * v[e];
    }
  }
}

namespace {

void scale_tensor(Tensor& t, float s) {
  for (auto& v : t.data) v *= s;
}

// deterministic in-place shuffle (avoids library-specific std::shuffle order)
void shuffle_indices(std::vector<int>& idx, std::mt19937& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    const size_t j =
        std::uniform_int_distribution<size_t>(0, i - 1)(rng);
    std::swap(idx[i - 1], idx[j]);
  }
}

Tensor replicate_channels(const Tensor& image, int channels) {
  if (image.c == channels) return image;
  if (image.c != 1)
    throw std::invalid_argument("cannot adapt a " + std::to_string(image.c) +
                                "-channel image to " +
                                std::to_string(channels) + " channels");
  Tensor out(image.n, channels, image.h, image.w);
  const int64_t plane = (int64_t)image.h * image.w;
  for (int n = 0; n < image.n; ++n)
    for (int c = 0; c < channels; ++c)
      std::copy_n(image.ptr() + n * plane, plane,
                  out.ptr() + ((int64_t)n * channels + c) * plane);
  return out;
}

}  // namespace

MetricsReport evaluate_model(Model& model, const std::vector<Sample>& split,
                             const PostprocessConfig& post, int image_size,
                             EvalArtifacts* artifacts) {
  model.set_training(false);
  const bool has_det = model.has_det, has_seg = model.has_seg;

  std::vector<std::vector<Detection>> dets;
  std::vector<std::vector<GroundTruthBox>> gts;
  std::vector<std::string> ids;
  SegConfusion confusion;

  for (const Sample& raw : split) {
    Sample s = resize_sample(raw, image_size, image_size);
    const Tensor input = replicate_channels(s.image, model.cfg.in_channels);
    ModelOutputs out = model.forward(input);
    if (has_det) {
      dets.push_back(decode_detections(out.det.heatmap, out.det.size, 0, post));
      gts.push_back(to_ground_truth(s.boxes));
      ids.push_back(s.id);
    }
    if (has_seg) {
      std::vector<uint8_t> pred =
          binarize_mask(out.seg_probs, 0, post.mask_threshold);
      confusion.add(pred, s.mask);
      if (artifacts) artifacts->pred_masks.push_back(std::move(pred));
    }
    if (artifacts) artifacts->resized.push_back(std::move(s));
  }
  if (artifacts && has_det) {
    artifacts->detections = dets;
    artifacts->ground_truths = gts;
  }
  model.set_training(true);

  MetricsReport r;
  if (has_det) r = compute_detection_metrics(dets, gts, ids, post.top_k);
  r.has_detection = has_det;
  if (has_seg) {
    r.has_segmentation = true;
    r.target_iou = confusion.target_iou();
    r.background_iou = confusion.background_iou();
    r.miou = confusion.miou();
  }
  return r;
}

MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                  const std::vector<Sample>& split,
                                  TaskMode* mode_out,
                                  EvalArtifacts* artifacts) {
  const Config cfg = read_checkpoint_config(checkpoint_path);
  Model model(cfg.model);
  model.init(0);
  nn::StateList state;
  model.collect_state(state);
  load_checkpoint(checkpoint_path, state);
  if (mode_out) *mode_out = cfg.model.mode;
  return evaluate_model(model, split, cfg.postprocess, cfg.train.image_size,
                        artifacts);
}

Trainer::Trainer(const Config& cfg, std::vector<Sample> train_set,
                 std::vector<Sample> val_set,
                 const std::string& pretrained_backbone)
    : cfg_(cfg),
      train_set_(std::move(train_set)),
      val_set_(std::move(val_set)) {
  cfg_.validate();
  if (train_set_.empty())
    throw std::invalid_argument("trainer: empty training set");
  model_ = std::make_unique<Model>(cfg_.model);
  model_->init(cfg_.train.seed);
  if (!pretrained_backbone.empty())
    load_pretrained_backbone(pretrained_backbone, *model_);
  model_->collect_params(params_);
  opt_.lr = cfg_.train.lr;
  opt_.momentum = cfg_.train.momentum;
  opt_.weight_decay = cfg_.train.weight_decay;
  opt_.attach(params_);
}

double Trainer::lr_for_epoch(int epoch) const {
  return cfg_.train.lr * std::pow((double)cfg_.train.lr_gamma, (double)epoch);
}

Tensor Trainer::assemble_batch(const std::vector<Sample>& samples) {
  const int n = (int)samples.size();
  const int c = cfg_.model.in_channels;
  const int s = cfg_.train.image_size;
  Tensor batch(n, c, s, s);
  for (int i = 0; i < n; ++i) {
    const Tensor img = replicate_channels(samples[i].image, c);
    std::copy_n(img.ptr(), img.size(), batch.ptr() + (int64_t)i * img.size());
  }
  return batch;
}

Trainer::StepLosses Trainer::train_step(const std::vector<int>& batch_indices,
                                        int epoch, int step) {
  const int s = cfg_.train.image_size;
  std::vector<Sample> batch_samples;
  batch_samples.reserve(batch_indices.size());
  for (int idx : batch_indices) {
    Sample sample = train_set_[idx];
    if (cfg_.train.augment) {
      std::mt19937 rng((uint32_t)mix_seed(
          mix_seed(cfg_.train.seed, (uint64_t)epoch), (uint64_t)idx));
      sample = augment(sample, rng);
    }
    batch_samples.push_back(resize_sample(sample, s, s));
  }

  const Tensor input = assemble_batch(batch_samples);
  ModelOutputs out = model_->forward(input);

  DetLossReport det_rep;
  SegLossReport seg_rep;
  Tensor ghm, gsize, gseg;
  if (model_->has_det) {
    std::vector<DetectionTargets> targets;
    targets.reserve(batch_samples.size());
    for (const auto& bs : batch_samples)
      targets.push_back(encode_targets(bs.boxes, s, s, cfg_.model.min_overlap));
    det_rep = detection_loss(out.det, targets, cfg_.model, &ghm, &gsize);
    scale_tensor(ghm, cfg_.model.lambda_det);
    scale_tensor(gsize, cfg_.model.lambda_det);
  }
  if (model_->has_seg) {
    std::vector<const std::vector<uint8_t>*> masks;
    masks.reserve(batch_samples.size());
    for (const auto& bs : batch_samples) masks.push_back(&bs.mask);
    seg_rep = segmentation_loss_batch(out.seg_probs, masks, cfg_.model, &gseg);
    scale_tensor(gseg, cfg_.model.lambda_seg);
  }
  const TotalLossReport total =
      total_loss(model_->has_det ? &det_rep : nullptr,
                 model_->has_seg ? &seg_rep : nullptr, cfg_.model.lambda_det,
                 cfg_.model.lambda_seg);

  StepLosses losses;
  losses.l_k = det_rep.l_k;
  losses.l_size = det_rep.l_size;
  losses.l_det = det_rep.l_det;
  losses.l_seg = seg_rep.l_seg;
  losses.l_all = total.l_all;

  if (!std::isfinite(losses.l_all) || !std::isfinite(losses.l_det) ||
      !std::isfinite(losses.l_seg)) {
    std::string ids;
    for (const auto& bs : batch_samples)
      ids += (ids.empty() ? "" : ", ") + bs.id;
    if (log_) {
      nlohmann::json replay = {{"epoch", epoch + 1},
                               {"step", step},
                               {"sample_ids", nlohmann::json::array()}};
      for (const auto& bs : batch_samples) replay["sample_ids"].push_back(bs.id);
      std::ofstream rf(cfg_.run_dir + "/nan_replay.json");
      rf << replay.dump(2) << "\n";
    }
    throw std::runtime_error("non-finite loss at epoch " +
                             std::to_string(epoch + 1) + " step " +
                             std::to_string(step) + " on samples: " + ids);
  }

  model_->zero_grad();
  model_->backward(model_->has_det ? &ghm : nullptr,
                   model_->has_det ? &gsize : nullptr,
                   model_->has_seg ? &gseg : nullptr);
  opt_.step(params_);
  return losses;
}

EpochRecord Trainer::run_epoch(int epoch) {
  opt_.lr = lr_for_epoch(epoch);

  std::vector<int> order(train_set_.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng((uint32_t)mix_seed(mix_seed(cfg_.train.seed, 0xba7c4),
                                      (uint64_t)epoch));
  shuffle_indices(order, rng);

  EpochRecord rec;
  rec.epoch = epoch + 1;
  rec.lr = opt_.lr;
  int steps = 0;
  for (size_t start = 0; start < order.size();
       start += (size_t)cfg_.train.batch_size) {
    const size_t end =
        std::min(order.size(), start + (size_t)cfg_.train.batch_size);
    const std::vector<int> batch(order.begin() + start, order.begin() + end);
    const StepLosses l = train_step(batch, epoch, steps);
    rec.l_k += l.l_k;
    rec.l_size += l.l_size;
    rec.l_det += l.l_det;
    rec.l_seg += l.l_seg;
    rec.l_all += l.l_all;
    if (log_) {
      nlohmann::json line = {{"epoch", epoch + 1}, {"step", steps},
                             {"l_k", l.l_k},       {"l_size", l.l_size},
                             {"l_det", l.l_det},   {"l_seg", l.l_seg},
                             {"l_all", l.l_all},   {"lr", opt_.lr}};
      *log_ << line.dump() << "\n";
      log_->flush();
    }
    ++steps;
  }
  if (steps > 0) {
    rec.l_k /= steps;
    rec.l_size /= steps;
    rec.l_det /= steps;
    rec.l_seg /= steps;
    rec.l_all /= steps;
  }
  return rec;
}

MetricsReport Trainer::validate() {
  return evaluate_model(*model_, val_set_, cfg_.postprocess,
                        cfg_.train.image_size);
}

RunRecord Trainer::train() {
  fs::create_directories(fs::path(cfg_.run_dir) / "checkpoints");
  fs::create_directories(fs::path(cfg_.run_dir) / "metrics");
  {
    std::ofstream echo(cfg_.run_dir + "/config.echo");
    if (!echo)
      throw std::runtime_error("cannot write run directory " + cfg_.run_dir);
    echo << config_to_json(cfg_).dump(2) << "\n";
  }
  log_ = std::make_unique<std::ofstream>(cfg_.run_dir + "/log.jsonl");

  const bool select_by_ap50 = model_->has_det;
  RunRecord run;
  run.source_rev = MTNET_SOURCE_REV;
  for (int epoch = 0; epoch < cfg_.train.epochs; ++epoch) {
    EpochRecord rec = run_epoch(epoch);
    const bool last = epoch + 1 == cfg_.train.epochs;
    if ((epoch + 1) % cfg_.train.val_interval == 0 || last) {
      rec.has_validation = true;
      rec.validation = validate();
      const std::string name = "epoch_" + std::to_string(epoch + 1);
      rec.checkpoint_path = cfg_.run_dir + "/checkpoints/" + name + ".ckpt";
      nn::StateList state;
      model_->collect_state(state);
      save_checkpoint(rec.checkpoint_path, cfg_, state);
      write_metrics_json(rec.validation,
                         cfg_.run_dir + "/metrics/" + name + ".json");

      const double metric =
          select_by_ap50 ? rec.validation.ap50 : rec.validation.miou;
      if (metric > run.best_metric) {
        run.best_metric = metric;
        run.best_epoch = epoch + 1;
        run.best_checkpoint = rec.checkpoint_path;
        nlohmann::json best = {{"epoch", run.best_epoch},
                               {"metric", select_by_ap50 ? "AP50" : "miou"},
                               {"value", run.best_metric * 100.0},
                               {"checkpoint", run.best_checkpoint}};
        std::ofstream bf(cfg_.run_dir + "/best.json");
        bf << best.dump(2) << "\n";
      }
    }
    run.epochs.push_back(std::move(rec));
  }

  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& r : run.epochs) {
    nlohmann::json e = {{"epoch", r.epoch},   {"l_k", r.l_k},
                        {"l_size", r.l_size}, {"l_det", r.l_det},
                        {"l_seg", r.l_seg},   {"l_all", r.l_all},
                        {"lr", r.lr}};
    if (r.has_validation) {
      e["checkpoint"] = r.checkpoint_path;
      if (r.validation.has_detection) {
        e["val_AP"] = r.validation.ap * 100.0;
        e["val_AP50"] = r.validation.ap50 * 100.0;
        e["val_AP75"] = r.validation.ap75 * 100.0;
      }
      if (r.validation.has_segmentation) {
        e["val_target_iou"] = r.validation.target_iou * 100.0;
        e["val_background_iou"] = r.validation.background_iou * 100.0;
        e["val_miou"] = r.validation.miou * 100.0;
      }
    }
    epochs.push_back(std::move(e));
  }
  nlohmann::json record = {{"epochs", epochs},
                           {"best_epoch", run.best_epoch},
                           {"best_metric", run.best_metric * 100.0},
                           {"best_checkpoint", run.best_checkpoint},
                           {"source_rev", run.source_rev}};
  std::ofstream rf(cfg_.run_dir + "/record.json");
  rf << record.dump(2) << "\n";
  log_.reset();
  return run;
}

}  // namespace mtnet
