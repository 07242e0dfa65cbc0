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

namespace mtnet {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major
};

// Reads any PNG color type as 8-bit grayscale (palette/RGB converted,
// 16-bit stripped, alpha dropped).
GrayImage read_png_gray(const std::string& path);

void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<uint8_t>& pixels);

// interleaved RGB, 3 bytes per pixel
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& pixels);

}  // namespace mtnet
