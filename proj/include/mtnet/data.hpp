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

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mtnet/config.hpp"
#include "mtnet/data_types.hpp"

namespace mtnet {

// splitmix64 combiner for deriving independent stream seeds
uint64_t mix_seed(uint64_t a, uint64_t b);

// Tight boxes of the 8-connected components of a {0,1} mask, in discovery
// (scan) order. Any mask value other than 0 or 1 is an error.
std::vector<BoxAnnotation> mask_to_boxes(const std::vector<uint8_t>& mask,
                                         int h, int w);

// Deterministic shuffle of the sorted ids, then floor(fraction * n) to train.
std::pair<std::vector<std::string>, std::vector<std::string>> split_dataset(
    std::vector<std::string> ids, double train_fraction, uint64_t seed);

// Random horizontal flip (p = 0.5) plus a random crop of 0.6-1.0 of each
// dimension. Boxes are recomputed from the cropped mask; a crop that would
// drop every target of a non-empty sample is retried up to 10 times, then
// the sample passes through unchanged.
Sample augment(const Sample& s, std::mt19937& rng);

// Bilinear image resize, nearest-neighbor mask resize. Boxes are rescaled to
// enclose their components; boxes whose component vanished are dropped.
Sample resize_sample(const Sample& s, int target_h, int target_w);

// Deterministic synthetic scenes: smooth background, Gaussian pixel noise,
// and well-separated elliptical blobs whose masks are the analytic half-peak
// level sets.
std::vector<Sample> synth_generate(const SynthConfig& cfg);

// dataset directory layout: images/<id>.png, masks/<id>.png,
// annotations.json (COCO), splits/train.txt, splits/val.txt
void save_dataset(const std::vector<Sample>& samples, const std::string& root);
void write_annotations(const std::vector<Sample>& samples,
                       const std::string& root);
void write_split(const std::string& root,
                 const std::vector<std::string>& train_ids,
                 const std::vector<std::string>& val_ids);
std::pair<std::vector<std::string>, std::vector<std::string>> read_split(
    const std::string& root);

// Loads every image/mask pair under root and derives boxes from the masks.
std::vector<Sample> load_dataset(const std::string& root);

// 8-bit grayscale <-> [0,1] float image plane
Tensor gray_to_tensor(const std::vector<uint8_t>& pixels, int h, int w,
                      int channels);
std::vector<uint8_t> tensor_to_gray(const Tensor& image, int n);

}  // namespace mtnet
