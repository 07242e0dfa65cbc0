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

#include <cstdint>
#include <string>
#include <vector>

#include "mtnet/data_types.hpp"

namespace mtnet {

// Intersection over union of two boxes with continuous corners
// (x1,y1,x2,y2), x2/y2 exclusive. Degenerate boxes give 0.
double box_iou(double ax1, double ay1, double ax2, double ay2, double bx1,
               double by1, double bx2, double by2);

struct GroundTruthBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // continuous corners
};

struct ApResult {
  double ap = 0.0;
  bool undefined = false;  // no ground truth anywhere
};

// COCO-style AP at one IoU threshold: per-image greedy matching in
// descending score order (each ground truth matched at most once), a global
// precision-recall ranking, and 101-point interpolation. Detections beyond
// max_dets per image are dropped, lowest scores first.
ApResult average_precision(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<GroundTruthBox>>& ground_truths,
    double iou_threshold, int max_dets = 100);

// Precision/recall after each detection of the global score ranking.
struct PrCurve {
  std::vector<double> recall;
  std::vector<double> precision;
};

PrCurve precision_recall_curve(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<GroundTruthBox>>& ground_truths,
    double iou_threshold, int max_dets = 100);

// Dataset-accumulated segmentation confusion counts.
struct SegConfusion {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt);
  double target_iou() const;
  double background_iou() const;
  double miou() const;
};

struct ImageDiagnostics {
  std::string id;
  int n_ground_truth = 0;
  int n_detections = 0;
  int true_positives_50 = 0;  // matches at IoU threshold 0.5
};

struct MetricsReport {
  // all fractions in [0,1]; serialized as x100 percentages
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double target_iou = 0.0;
  double background_iou = 0.0;
  double miou = 0.0;
  bool ap_undefined = false;
  bool has_detection = false;
  bool has_segmentation = false;
  std::vector<ImageDiagnostics> per_image;
};

// AP averaged over IoU thresholds 0.50:0.05:0.95 plus AP50/AP75. image_ids
// (optional) label the per-image diagnostics.
MetricsReport compute_detection_metrics(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<GroundTruthBox>>& ground_truths,
    const std::vector<std::string>& image_ids = {}, int max_dets = 100);

std::vector<GroundTruthBox> to_ground_truth(
    const std::vector<BoxAnnotation>& boxes);

// mode gating: asking for a metric family the producing mode never computed
// is an error, not a silent zero
const MetricsReport& require_detection(const MetricsReport& r);
const MetricsReport& require_segmentation(const MetricsReport& r);

// metrics JSON {"AP","AP50","AP75","target_iou","background_iou","miou"},
// values x100; only the families the report carries are written
void write_metrics_json(const MetricsReport& r, const std::string& path);
std::string metrics_table(const MetricsReport& r);

// COCO interchange: results are [{image_id, category_id, bbox, score}] with
// bbox [x, y, w, h] in continuous coordinates.
void write_coco_results(const std::vector<std::vector<Detection>>& detections,
                        const std::vector<int>& image_ids,
                        const std::string& path);

struct CocoDataset {
  std::vector<int> image_ids;                             // sorted
  std::vector<std::string> file_names;                    // parallel
  std::vector<std::vector<GroundTruthBox>> ground_truths;  // parallel
};

CocoDataset read_coco_annotations(const std::string& path);

// Joins results.json against the annotation image ids (missing images get
// empty detection lists) and scores the detection metrics.
MetricsReport evaluate_coco_files(const std::string& annotations_path,
                                  const std::string& results_path);

}  // namespace mtnet
