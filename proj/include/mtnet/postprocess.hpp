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

#include <vector>

#include "mtnet/config.hpp"
#include "mtnet/data_types.hpp"

namespace mtnet {

struct Peak {
  int x = 0, y = 0;
  int class_id = 0;
  float score = 0.0f;
};

// A pixel is a peak when it is the strict maximum of its 3x3 neighborhood;
// on plateaus the smallest (y, x) wins. Results are sorted by descending
// score (ties by (y, x)), cut at top_k, and filtered by score_threshold.
std::vector<Peak> extract_peaks(const Tensor& heatmap, int n, int top_k,
                                float score_threshold);

// Box around each peak from the size map at the peak pixel: sizes clamped to
// >= 1 pixel, corners clipped to the image. Scores descend.
std::vector<Detection> assemble_boxes(const std::vector<Peak>& peaks,
                                      const Tensor& size_map, int n,
                                      int image_h, int image_w);

std::vector<Detection> decode_detections(const Tensor& heatmap,
                                         const Tensor& size_map, int n,
                                         const PostprocessConfig& cfg);

// threshold segmentation probabilities into a {0,1} mask
std::vector<uint8_t> binarize_mask(const Tensor& probs, int n,
                                   float threshold);

}  // namespace mtnet
