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
#include "mtnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mtnet {

double box_iou(double ax1, double ay1, double ax2, double ay2, double bx1,
               double by1, double bx2, double by2) {
  const double area_a = std::max(0.0, ax2 - ax1) * std::max(0.0, ay2 - ay1);
  const double area_b = std::max(0.0, bx2 - bx1) * std::max(0.0, by2 - by1);
  const double iw = std::min(ax2, bx2) - std::max(ax1, bx1);
  const double ih = std::min(ay2, by2) - std::max(ay1, by1);
  const double inter = std::max(0.0, iw) * std::max(0.0, ih);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

struct RankedDetection {
  double score;
  bool matched;
};

// Per-image greedy matching at one threshold; returns the image's detections
// (capped at max_dets) flagged true/false positive.
std::vector<RankedDetection> match_image(
    const std::vector<Detection>& dets_in,
    const std::vector<GroundTruthBox>& gts, double iou_threshold,
    int max_dets, int* tp_out) {
  std::vector<int> order(dets_in.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets_in[a].score > dets_in[b].score;
  });
  if ((int)order.size() > max_dets) order.resize(max_dets);

  std::vector<char> gt_used(gts.size(), 0);
  std::vector<RankedDetection> out;
  out.reserve(order.size());
  int tp = 0;
  for (int di : order) {
    const Detection& d = dets_in[di];
    int best = -1;
    double best_iou = iou_threshold;
    for (size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_used[gi]) continue;
      const double iou = box_iou(d.x1, d.y1, d.x2, d.y2, gts[gi].x1,
                                 gts[gi].y1, gts[gi].x2, gts[gi].y2);
      if (iou > best_iou || (best < 0 && iou >= iou_threshold)) {
        best = (int)gi;
        best_iou = iou;
      }
    }
    if (best >= 0) {
      gt_used[best] = 1;
      ++tp;
    }
    out.push_back({d.score, best >= 0});
  }
  if (tp_out) *tp_out = tp;
  return out;
}

double interpolate_ap_101(const std::vector<RankedDetection>& ranked,
                          int64_t total_gt) {
  // global ranking by descending score, stable in image order
  std::vector<int> order(ranked.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ranked[a].score > ranked[b].score;
  });
  std::vector<double> recall(order.size()), precision(order.size());
  int64_t tp = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    if (ranked[order[i]].matched) ++tp;
    recall[i] = (double)tp / (double)total_gt;
    precision[i] = (double)tp / (double)(i + 1);
  }
  // suffix max turns precision into the monotone envelope
  std::vector<double> env(precision);
  for (int i = (int)env.size() - 2; i >= 0; --i)
    env[i] = std::max(env[i], env[i + 1]);

  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double want = (double)r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), want);
    if (it != recall.end()) sum += env[it - recall.begin()];
  }
  return sum / 101.0;
}

}  // namespace

ApResult average_precision(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<GroundTruthBox>>& ground_truths,
    double iou_threshold, int max_dets) {
  if (detections.size() != ground_truths.size())
    throw std::invalid_argument(
        "average_precision: detections and ground truths must cover the "
        "same images");
  int64_t total_gt = 0;
  for (const auto& g : ground_truths) total_gt += (int64_t)g.size();
  if (total_gt == 0) return {0.0, true};

  std::vector<RankedDetection> ranked;
  for (size_t i = 0; i < detections.size(); ++i) {
    auto img = match_image(detections[i], ground_truths[i], iou_threshold,
                           max_dets, nullptr);
    ranked.insert(ranked.end(), img.begin(), img.end());
  }
  if (ranked.empty()) return {0.0, false};
  return {interpolate_ap_101(ranked, total_gt), false};
}

PrCurve precision_recall_curve(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<GroundTruthBox>>& ground_truths,
    double iou_threshold, int max_dets) {
  if (detections.size() != ground_truths.size())
    throw std::invalid_argument(
        "precision_recall_curve: detections and ground truths must cover "
        "the same images");
  int64_t total_gt = 0;
  for (const auto& g : ground_truths) total_gt += (int64_t)g.size();
  PrCurve curve;
  if (total_gt == 0) return curve;

  std::vector<RankedDetection> ranked;
  for (size_t i = 0; i < detections.size(); ++i) {
    auto img = match_image(detections[i], ground_truths[i], iou_threshold,
                           max_dets, nullptr);
    ranked.insert(ranked.end(), img.begin(), img.end());
  }
  std::vector<int> order(ranked.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return ranked[a].score > ranked[b].score;
  });
  int64_t tp = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    if (ranked[order[i]].matched) ++tp;
    curve.recall.push_back((double)tp / (double)total_gt);
    curve.precision.push_back((double)tp / (double)(i + 1));
  }
  return curve;
}

void SegConfusion::add(const std::vector<uint8_t>& pred,
                       const std::vector<uint8_t>& gt) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("segmentation_iou: mask shape mismatch");
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, t = gt[i] != 0;
    if (p && t)
      ++tp;
    else if (p && !t)
      ++fp;
    else if (!p && t)
      ++fn;
    else
      ++tn;
  }
}

double SegConfusion::target_iou() const {
  const int64_t denom = tp + fp + fn;
  return denom > 0 ? (double)tp / (double)denom : 1.0;
}

double SegConfusion::background_iou() const {
  const int64_t denom = tn + fp + fn;
  return denom > 0 ? (double)tn / (double)denom : 1.0;
}

double SegConfusion::miou() const {
  return 0.5 * (target_iou() + background_iou());
}

MetricsReport compute_detection_metrics(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<GroundTruthBox>>& ground_truths,
    const std::vector<std::string>& image_ids, int max_dets) {
  MetricsReport r;
  r.has_detection = true;
  double sum = 0.0;
  for (int t = 50; t <= 95; t += 5) {
    const ApResult a =
        average_precision(detections, ground_truths, t / 100.0, max_dets);
    r.ap_undefined = r.ap_undefined || a.undefined;
    sum += a.ap;
    if (t == 50) r.ap50 = a.ap;
    if (t == 75) r.ap75 = a.ap;
  }
  r.ap = sum / 10.0;

  r.per_image.resize(detections.size());
  for (size_t i = 0; i < detections.size(); ++i) {
    ImageDiagnostics& d = r.per_image[i];
    d.id = i < image_ids.size() ? image_ids[i] : std::to_string(i);
    d.n_ground_truth = (int)ground_truths[i].size();
    d.n_detections = (int)detections[i].size();
    match_image(detections[i], ground_truths[i], 0.5, max_dets,
                &d.true_positives_50);
  }
  return r;
}

std::vector<GroundTruthBox> to_ground_truth(
    const std::vector<BoxAnnotation>& boxes) {
  std::vector<GroundTruthBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    double x1, y1, x2, y2;
    box_continuous(b, x1, y1, x2, y2);
    out.push_back({x1, y1, x2, y2});
  }
  return out;
}

const MetricsReport& require_detection(const MetricsReport& r) {
  if (!r.has_detection)
    throw std::runtime_error(
        "detection metrics requested, but this report came from a "
        "segmentation-only mode");
  return r;
}

const MetricsReport& require_segmentation(const MetricsReport& r) {
  if (!r.has_segmentation)
    throw std::runtime_error(
        "segmentation metrics requested, but this report came from a "
        "detection-only mode");
  return r;
}

void write_metrics_json(const MetricsReport& r, const std::string& path) {
  nlohmann::json j;
  if (r.has_detection) {
    j["AP"] = r.ap * 100.0;
    j["AP50"] = r.ap50 * 100.0;
    j["AP75"] = r.ap75 * 100.0;
    if (r.ap_undefined) j["AP_undefined"] = true;
  }
  if (r.has_segmentation) {
    j["target_iou"] = r.target_iou * 100.0;
    j["background_iou"] = r.background_iou * 100.0;
    j["miou"] = r.miou * 100.0;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write metrics file " + path);
  f << j.dump(2) << "\n";
}

std::string metrics_table(const MetricsReport& r) {
  char buf[256];
  std::string out;
  if (r.has_detection) {
    std::snprintf(buf, sizeof(buf),
                  "detection     AP %6.2f   AP50 %6.2f   AP75 %6.2f%s\n",
                  r.ap * 100.0, r.ap50 * 100.0, r.ap75 * 100.0,
                  r.ap_undefined ? "   (no ground truth: AP undefined)" : "");
    out += buf;
  }
  if (r.has_segmentation) {
    std::snprintf(buf, sizeof(buf),
                  "segmentation  IoU %6.2f  bg IoU %6.2f   mIoU %6.2f\n",
                  r.target_iou * 100.0, r.background_iou * 100.0,
                  r.miou * 100.0);
    out += buf;
  }
  return out;
}

void write_coco_results(const std::vector<std::vector<Detection>>& detections,
                        const std::vector<int>& image_ids,
                        const std::string& path) {
  if (detections.size() != image_ids.size())
    throw std::invalid_argument("write_coco_results: id count mismatch");
  nlohmann::json arr = nlohmann::json::array();
  for (size_t i = 0; i < detections.size(); ++i) {
    for (const auto& d : detections[i]) {
      arr.push_back({{"image_id", image_ids[i]},
                     {"category_id", d.class_id + 1},
                     {"bbox", {d.x1, d.y1, d.x2 - d.x1, d.y2 - d.y1}},
                     {"score", d.score}});
    }
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write results file " + path);
  f << arr.dump(2) << "\n";
}

CocoDataset read_coco_annotations(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read annotations file " + path);
  nlohmann::json j;
  f >> j;
  if (!j.contains("images") || !j.contains("annotations"))
    throw std::runtime_error("annotations file " + path +
                             " lacks images/annotations arrays");
  std::map<int, std::pair<std::string, std::vector<GroundTruthBox>>> by_id;
  for (const auto& im : j["images"])
    by_id[im.at("id").get<int>()] = {im.at("file_name").get<std::string>(),
                                     {}};
  for (const auto& an : j["annotations"]) {
    const int id = an.at("image_id").get<int>();
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::runtime_error("annotation references unknown image id " +
                               std::to_string(id));
    const auto& bb = an.at("bbox");
    const double x = bb.at(0).get<double>(), y = bb.at(1).get<double>();
    const double w = bb.at(2).get<double>(), h = bb.at(3).get<double>();
    it->second.second.push_back({x, y, x + w, y + h});
  }
  CocoDataset ds;
  for (auto& [id, entry] : by_id) {
    ds.image_ids.push_back(id);
    ds.file_names.push_back(entry.first);
    ds.ground_truths.push_back(std::move(entry.second));
  }
  return ds;
}

MetricsReport evaluate_coco_files(const std::string& annotations_path,
                                  const std::string& results_path) {
  const CocoDataset ds = read_coco_annotations(annotations_path);
  std::ifstream f(results_path);
  if (!f) throw std::runtime_error("cannot read results file " + results_path);
  nlohmann::json j;
  f >> j;
  std::map<int, size_t> index;
  for (size_t i = 0; i < ds.image_ids.size(); ++i) index[ds.image_ids[i]] = i;
  std::vector<std::vector<Detection>> dets(ds.image_ids.size());
  std::vector<std::string> ids(ds.file_names);
  for (const auto& rec : j) {
    const int id = rec.at("image_id").get<int>();
    auto it = index.find(id);
    if (it == index.end())
      throw std::runtime_error("result references unknown image id " +
                               std::to_string(id));
    const auto& bb = rec.at("bbox");
    Detection d;
    d.x1 = bb.at(0).get<double>();
    d.y1 = bb.at(1).get<double>();
    d.x2 = d.x1 + bb.at(2).get<double>();
    d.y2 = d.y1 + bb.at(3).get<double>();
    d.score = rec.at("score").get<double>();
    d.class_id = rec.at("category_id").get<int>() - 1;
    dets[it->second].push_back(d);
  }
  return compute_detection_metrics(dets, ds.ground_truths, ids);
}

}  // namespace mtnet
