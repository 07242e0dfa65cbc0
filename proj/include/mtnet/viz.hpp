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
#include "mtnet/evaluation.hpp"
#include "mtnet/tensor.hpp"

namespace mtnet {

// RGB overlay of model outputs over a grayscale input: predicted mask pixels
// are painted blue, box outlines are colored by confidence (green >= 0.7,
// yellow >= 0.4, red below). Deterministic pixel-for-pixel.
std::vector<uint8_t> render_overlay(const Tensor& image, int n,
                                    const std::vector<uint8_t>& pred_mask,
                                    const std::vector<Detection>& detections);

void write_overlay_png(const std::string& path, const Tensor& image, int n,
                       const std::vector<uint8_t>& pred_mask,
                       const std::vector<Detection>& detections);

// static SVG plot of a precision-recall curve
void write_pr_curve_svg(const std::string& path, const PrCurve& curve);

}  // namespace mtnet
