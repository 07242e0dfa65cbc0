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
#include "mtnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <queue>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mtnet/kernels.hpp"
#include "mtnet/png_io.hpp"

namespace fs = std::filesystem;

namespace mtnet {

namespace {

// 8-connected component labeling; labels are 1-based, 0 = background.
// Returns the component count; out_labels gets one label per pixel.
int label_components(const std::vector<uint8_t>& mask, int h, int w,
                     std::vector<int>& out_labels) {
  out_labels.assign(mask.size(), 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const size_t i0 = (size_t)y0 * w + x0;
      if (!mask[i0] || out_labels[i0]) continue;
      ++next;
      stack.push_back({y0, x0});
      out_labels[i0] = next;
      while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int qy = y + dy, qx = x + dx;
            if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
            const size_t qi = (size_t)qy * w + qx;
            if (mask[qi] && !out_labels[qi]) {
              out_labels[qi] = next;
              stack.push_back({qy, qx});
            }
          }
        }
      }
    }
  }
  return next;
}

double rand_unit(std::mt19937& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int rand_int(std::mt19937& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

uint64_t mix_seed(uint64_t a, uint64_t b) {
  // splitmix64 over the combined words
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<BoxAnnotation> mask_to_boxes(const std::vector<uint8_t>& mask,
                                         int h, int w) {
  if ((int64_t)mask.size() != (int64_t)h * w)
    throw std::invalid_argument("mask_to_boxes: mask size mismatch");
  for (uint8_t v : mask)
    if (v > 1)
      throw std::invalid_argument(
          "mask_to_boxes: mask must be binary, found value " +
          std::to_string((int)v));
  std::vector<int> labels;
  const int count = label_components(mask, h, w, labels);
  std::vector<BoxAnnotation> boxes(count);
  for (auto& b : boxes) {
    b.x1 = w;
    b.y1 = h;
    b.x2 = -1;
    b.y2 = -1;
  }
  std::vector<int64_t> sx(count, 0), sy(count, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = labels[(size_t)y * w + x];
      if (!l) continue;
      BoxAnnotation& b = boxes[l - 1];
      b.x1 = std::min(b.x1, x);
      b.y1 = std::min(b.y1, y);
      b.x2 = std::max(b.x2, x);
      b.y2 = std::max(b.y2, y);
      b.area += 1;
      sx[l - 1] += x;
      sy[l - 1] += y;
    }
  }
  for (int i = 0; i < count; ++i) {
    boxes[i].cx = (double)sx[i] / boxes[i].area;
    boxes[i].cy = (double)sy[i] / boxes[i].area;
  }
  return boxes;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_dataset(
    std::vector<std::string> ids, double train_fraction, uint64_t seed) {
  if (ids.empty())
    throw std::invalid_argument("split_dataset: empty id list");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("split_dataset: duplicate ids");
  std::mt19937 rng((uint32_t)mix_seed(seed, 0x5eed));
  for (size_t i = ids.size() - 1; i > 0; --i)
    std::swap(ids[i], ids[rand_int(rng, 0, (int)i)]);
  const size_t n_train = (size_t)((double)ids.size() * train_fraction);
  std::vector<std::string> train(ids.begin(), ids.begin() + n_train);
  std::vector<std::string> val(ids.begin() + n_train, ids.end());
  return {train, val};
}

namespace {

Sample flip_horizontal(const Sample& s) {
  Sample out;
  out.id = s.id;
  const int h = s.height(), w = s.width();
  out.image = Tensor(1, s.image.c, h, w);
  for (int c = 0; c < s.image.c; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.image.at(0, c, y, x) = s.image.at(0, c, y, w - 1 - x);
  out.mask.resize(s.mask.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.mask[(size_t)y * w + x] = s.mask[(size_t)y * w + (w - 1 - x)];
  out.boxes.reserve(s.boxes.size());
  for (const auto& b : s.boxes) {
    BoxAnnotation f = b;
    f.x1 = w - 1 - b.x2;
    f.x2 = w - 1 - b.x1;
    f.cx = w - 1 - b.cx;
    out.boxes.push_back(f);
  }
  return out;
}

Sample crop_window(const Sample& s, int y0, int x0, int ch, int cw) {
  Sample out;
  out.id = s.id;
  out.image = Tensor(1, s.image.c, ch, cw);
  for (int c = 0; c < s.image.c; ++c)
    for (int y = 0; y < ch; ++y)
      for (int x = 0; x < cw; ++x)
        out.image.at(0, c, y, x) = s.image.at(0, c, y0 + y, x0 + x);
  out.mask.resize((size_t)ch * cw);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      out.mask[(size_t)y * cw + x] =
          s.mask[(size_t)(y0 + y) * s.width() + (x0 + x)];
  out.boxes = mask_to_boxes(out.mask, ch, cw);
  return out;
}

}  // namespace

Sample augment(const Sample& s, std::mt19937& rng) {
  Sample cur = rand_unit(rng) < 0.5 ? flip_horizontal(s) : s;
  const int h = cur.height(), w = cur.width();
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double sy = 0.6 + 0.4 * rand_unit(rng);
    const double sx = 0.6 + 0.4 * rand_unit(rng);
    const int ch = std::max(1, (int)std::lround(sy * h));
    const int cw = std::max(1, (int)std::lround(sx * w));
    const int y0 = ch < h ? rand_int(rng, 0, h - ch) : 0;
    const int x0 = cw < w ? rand_int(rng, 0, w - cw) : 0;
    Sample cropped = crop_window(cur, y0, x0, ch, cw);
    if (cur.boxes.empty() || !cropped.boxes.empty()) return cropped;
  }
  return cur;
}

Sample resize_sample(const Sample& s, int target_h, int target_w) {
  if (target_h <= 0 || target_w <= 0)
    throw std::invalid_argument("resize: target dims must be positive");
  const int h = s.height(), w = s.width();
  if (h == target_h && w == target_w) return s;

  Sample out;
  out.id = s.id;
  out.image = Tensor(1, s.image.c, target_h, target_w);
  kernels::bilinear_forward(s.image.ptr(), out.image.ptr(), 1, s.image.c, h, w,
                            target_h, target_w);

  std::vector<int> labels;
  label_components(s.mask, h, w, labels);

  // nearest-neighbor sampling, same positions for mask and labels
  out.mask.resize((size_t)target_h * target_w);
  std::vector<char> survived(s.boxes.size(), 0);
  for (int y = 0; y < target_h; ++y) {
    const int sy = std::min(h - 1, (int)(((double)y + 0.5) * h / target_h));
    for (int x = 0; x < target_w; ++x) {
      const int sxp = std::min(w - 1, (int)(((double)x + 0.5) * w / target_w));
      const size_t si = (size_t)sy * w + sxp;
      out.mask[(size_t)y * target_w + x] = s.mask[si];
      const int l = labels[si];
      if (l && l <= (int)survived.size()) survived[l - 1] = 1;
    }
  }

  const double fx = (double)target_w / w;
  const double fy = (double)target_h / h;
  for (size_t i = 0; i < s.boxes.size(); ++i) {
    if (!survived[i]) continue;
    const BoxAnnotation& b = s.boxes[i];
    BoxAnnotation r;
    r.x1 = std::max(0, (int)std::floor(b.x1 * fx));
    r.y1 = std::max(0, (int)std::floor(b.y1 * fy));
    r.x2 = std::min(target_w - 1, (int)std::ceil((b.x2 + 1) * fx) - 1);
    r.y2 = std::min(target_h - 1, (int)std::ceil((b.y2 + 1) * fy) - 1);
    r.cx = b.cx * fx;
    r.cy = b.cy * fy;
    r.area = std::max(1, (int)std::lround(b.area * fx * fy));
    out.boxes.push_back(r);
  }
  return out;
}

std::vector<Sample> synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<Sample> samples;
  samples.reserve(cfg.count);
  const int S = cfg.image_size;
  for (int idx = 0; idx < cfg.count; ++idx) {
    std::mt19937 rng((uint32_t)mix_seed(cfg.seed, (uint64_t)idx));
    std::vector<double> img((size_t)S * S, 0.0);

    // smooth background: base level plus two low-frequency waves
    const double base = 0.2 + 0.25 * rand_unit(rng);
    for (auto& v : img) v = base;
    for (int g = 0; g < 2; ++g) {
      const double amp = 0.03 + 0.09 * rand_unit(rng);
      const double theta = 2.0 * M_PI * rand_unit(rng);
      const double freq = (0.5 + rand_unit(rng)) / S;
      const double phase = 2.0 * M_PI * rand_unit(rng);
      const double kx = std::cos(theta) * freq, ky = std::sin(theta) * freq;
      for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
          img[(size_t)y * S + x] +=
              amp * std::sin(2.0 * M_PI * (kx * x + ky * y) + phase);
    }

    // place well-separated elliptical targets
    struct Blob {
      double cx, cy, sx, sy, amp;
    };
    const int k = rand_int(rng, cfg.min_targets, cfg.max_targets);
    std::vector<Blob> blobs;
    for (int t = 0; t < k; ++t) {
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        Blob b;
        b.sx = cfg.sigma_min + (cfg.sigma_max - cfg.sigma_min) * rand_unit(rng);
        b.sy = cfg.sigma_min + (cfg.sigma_max - cfg.sigma_min) * rand_unit(rng);
        const double margin = 3.0 * cfg.sigma_max + 2.0;
        b.cx = margin + (S - 1 - 2.0 * margin) * rand_unit(rng);
        b.cy = margin + (S - 1 - 2.0 * margin) * rand_unit(rng);
        b.amp = 0.5 + 0.3 * rand_unit(rng);
        placed = true;
        for (const auto& o : blobs) {
          const double need = 3.0 * (std::max(b.sx, b.sy) +
                                     std::max(o.sx, o.sy)) + 4.0;
          const double d =
              std::hypot(b.cx - o.cx, b.cy - o.cy);
          if (d < need) {
            placed = false;
            break;
          }
        }
        if (placed) blobs.push_back(b);
      }
      if (!placed)
        throw std::runtime_error(
            "synth_generate: cannot place " + std::to_string(k) +
            " separated targets in a " + std::to_string(S) + "px image");
    }

    Sample sample;
    sample.id = [&] {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "synth_%05d", idx);
      return std::string(buf);
    }();
    sample.mask.assign((size_t)S * S, 0);
    const double half_peak = 2.0 * std::log(2.0);  // exp(-q/2) >= 1/2
    for (const auto& b : blobs) {
      const int x0 = std::max(0, (int)std::floor(b.cx - 4.0 * b.sx));
      const int x1 = std::min(S - 1, (int)std::ceil(b.cx + 4.0 * b.sx));
      const int y0 = std::max(0, (int)std::floor(b.cy - 4.0 * b.sy));
      const int y1 = std::min(S - 1, (int)std::ceil(b.cy + 4.0 * b.sy));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double dx = (x - b.cx) / b.sx, dy = (y - b.cy) / b.sy;
          const double q = dx * dx + dy * dy;
          img[(size_t)y * S + x] += b.amp * std::exp(-q / 2.0);
          if (q <= half_peak) sample.mask[(size_t)y * S + x] = 1;
        }
      }
    }

    if (cfg.noise_level > 0.0f) {
      std::normal_distribution<double> noise(0.0, cfg.noise_level);
      for (auto& v : img) v += noise(rng);
    }

    // quantize to 8 bits so the in-memory image equals its PNG round trip
    std::vector<uint8_t> bytes((size_t)S * S);
    for (size_t i = 0; i < bytes.size(); ++i) {
      const double v = std::clamp(img[i], 0.0, 1.0);
      bytes[i] = (uint8_t)std::lround(v * 255.0);
    }
    sample.image = gray_to_tensor(bytes, S, S, 1);
    sample.boxes = mask_to_boxes(sample.mask, S, S);
    samples.push_back(std::move(sample));
  }
  return samples;
}

Tensor gray_to_tensor(const std::vector<uint8_t>& pixels, int h, int w,
                      int channels) {
  Tensor t(1, channels, h, w);
  for (int c = 0; c < channels; ++c)
    for (size_t i = 0; i < pixels.size(); ++i)
      t.data[(size_t)c * h * w + i] = (float)pixels[i] / 255.0f;
  return t;
}

std::vector<uint8_t> tensor_to_gray(const Tensor& image, int n) {
  std::vector<uint8_t> out((size_t)image.h * image.w);
  const float* p = image.ptr() + (size_t)n * image.c * image.h * image.w;
  for (size_t i = 0; i < out.size(); ++i) {
    const float v = std::clamp(p[i], 0.0f, 1.0f);
    out[i] = (uint8_t)std::lround(v * 255.0f);
  }
  return out;
}

void write_annotations(const std::vector<Sample>& samples,
                       const std::string& root) {
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json annotations = nlohmann::json::array();
  int ann_id = 1;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    images.push_back({{"id", (int)i + 1},
                      {"file_name", s.id + ".png"},
                      {"width", s.width()},
                      {"height", s.height()}});
    for (const auto& b : s.boxes) {
      annotations.push_back({{"id", ann_id++},
                             {"image_id", (int)i + 1},
                             {"category_id", 1},
                             {"bbox", {b.x1, b.y1, b.pixel_w(), b.pixel_h()}},
                             {"area", b.area},
                             {"iscrowd", 0}});
    }
  }
  nlohmann::json doc = {
      {"info", {{"description", "infrared small-target dataset"}}},
      {"images", images},
      {"annotations", annotations},
      {"categories",
       nlohmann::json::array({{{"id", 1}, {"name", "target"}}})}};
  std::ofstream f(root + "/annotations.json");
  if (!f)
    throw std::runtime_error("cannot write " + root + "/annotations.json");
  f << doc.dump(2) << "\n";
}

void save_dataset(const std::vector<Sample>& samples,
                  const std::string& root) {
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "masks");
  for (const auto& s : samples) {
    write_png_gray((fs::path(root) / "images" / (s.id + ".png")).string(),
                   s.width(), s.height(), tensor_to_gray(s.image, 0));
    std::vector<uint8_t> m(s.mask.size());
    for (size_t i = 0; i < m.size(); ++i) m[i] = s.mask[i] ? 255 : 0;
    write_png_gray((fs::path(root) / "masks" / (s.id + ".png")).string(),
                   s.width(), s.height(), m);
  }
  write_annotations(samples, root);
}

void write_split(const std::string& root,
                 const std::vector<std::string>& train_ids,
                 const std::vector<std::string>& val_ids) {
  fs::create_directories(fs::path(root) / "splits");
  auto write_list = [&](const std::string& name,
                        const std::vector<std::string>& ids) {
    std::ofstream f((fs::path(root) / "splits" / name).string());
    if (!f) throw std::runtime_error("cannot write split file " + name);
    for (const auto& id : ids) f << id << "\n";
  };
  write_list("train.txt", train_ids);
  write_list("val.txt", val_ids);
}

std::pair<std::vector<std::string>, std::vector<std::string>> read_split(
    const std::string& root) {
  auto read_list = [&](const std::string& name) {
    std::ifstream f((fs::path(root) / "splits" / name).string());
    if (!f)
      throw std::runtime_error("missing split manifest " + root + "/splits/" +
                               name);
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(f, line))
      if (!line.empty()) ids.push_back(line);
    return ids;
  };
  return {read_list("train.txt"), read_list("val.txt")};
}

std::vector<Sample> load_dataset(const std::string& root) {
  const fs::path images_dir = fs::path(root) / "images";
  const fs::path masks_dir = fs::path(root) / "masks";
  if (!fs::is_directory(images_dir))
    throw std::runtime_error("dataset root '" + root +
                             "' has no images/ directory");
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(images_dir))
    if (e.path().extension() == ".png") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty())
    throw std::runtime_error("dataset root '" + root + "' has no images");

  std::vector<std::string> missing;
  for (const auto& id : ids)
    if (!fs::exists(masks_dir / (id + ".png"))) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "images without masks:";
    for (const auto& id : missing) msg += " " + id;
    throw std::runtime_error(msg);
  }

  std::vector<Sample> samples;
  samples.reserve(ids.size());
  for (const auto& id : ids) {
    GrayImage img = read_png_gray((images_dir / (id + ".png")).string());
    GrayImage msk = read_png_gray((masks_dir / (id + ".png")).string());
    if (img.width != msk.width || img.height != msk.height)
      throw std::runtime_error("image/mask size mismatch for id " + id);
    Sample s;
    s.id = id;
    s.image = gray_to_tensor(img.pixels, img.height, img.width, 1);
    s.mask.resize(msk.pixels.size());
    for (size_t i = 0; i < msk.pixels.size(); ++i) {
      const uint8_t v = msk.pixels[i];
      if (v != 0 && v != 1 && v != 255)
        throw std::runtime_error("mask for id " + id +
                                 " is not binary (value " +
                                 std::to_string((int)v) + ")");
      s.mask[i] = v ? 1 : 0;
    }
    s.boxes = mask_to_boxes(s.mask, msk.height, msk.width);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace mtnet
