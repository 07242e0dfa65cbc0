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

#include "mtnet/tensor.hpp"

namespace mtnet {

// Tight box around one mask component. Corners are inclusive pixel indices:
// a single-pixel blob at (x, y) has x1 == x2 == x, pixel width x2 - x1 + 1.
struct BoxAnnotation {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  double cx = 0.0, cy = 0.0;  // component centroid
  int area = 0;               // component pixel count

  int pixel_w() const { return x2 - x1 + 1; }
  int pixel_h() const { return y2 - y1 + 1; }
};

// One image with its ground truth. The mask is row-major h*w with values in
// {0,1}; boxes each enclose exactly one 8-connected mask component.
struct Sample {
  std::string id;
  Tensor image;  // 1 x C x H x W, values in [0,1]
  std::vector<uint8_t> mask;
  std::vector<BoxAnnotation> boxes;

  int height() const { return image.h; }
  int width() const { return image.w; }
};

// A decoded, scored box in continuous coordinates: the box covers
// [x1, x2] x [y1, y2] as real intervals (width = x2 - x1).
struct Detection {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
  double score = 0.0;
  int class_id = 0;
};

// inclusive pixel corners -> continuous extent used for IoU and COCO export
inline void box_continuous(const BoxAnnotation& b, double& x1, double& y1,
                           double& x2, double& y2) {
  x1 = b.x1;
  y1 = b.y1;
  x2 = b.x2 + 1.0;
  y2 = b.y2 + 1.0;
}

}  // namespace mtnet
