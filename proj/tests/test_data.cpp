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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "mtnet/data.hpp"
#include "mtnet/png_io.hpp"
#include "oracles.hpp"

using namespace mtnet;

namespace {

std::vector<uint8_t> make_mask(int h, int w,
                               const std::vector<std::pair<int, int>>& on) {
  std::vector<uint8_t> m((size_t)h * w, 0);
  for (auto [y, x] : on) m[(size_t)y * w + x] = 1;
  return m;
}

Sample make_sample(int h, int w, const std::vector<uint8_t>& mask) {
  Sample s;
  s.id = "t";
  s.image = Tensor(1, 1, h, w);
  for (int i = 0; i < h * w; ++i)
    s.image.data[i] = 0.1f + 0.8f * (float)((i * 37) % 97) / 96.0f;
  s.mask = mask;
  s.boxes = mask_to_boxes(mask, h, w);
  return s;
}

bool boxes_equal(const std::vector<BoxAnnotation>& a,
                 const std::vector<BoxAnnotation>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].x1 != b[i].x1 || a[i].y1 != b[i].y1 || a[i].x2 != b[i].x2 ||
        a[i].y2 != b[i].y2 || a[i].area != b[i].area)
      return false;
  }
  return true;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("mtnet_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("data: seed mixing separates streams") {
  const uint64_t a = mix_seed(1, 2);
  const uint64_t b = mix_seed(2, 1);
  const uint64_t c = mix_seed(1, 3);
  CHECK(a != b);
  CHECK(a != c);
  CHECK(mix_seed(1, 2) == a);
  CHECK(mix_seed(0, 0) != 0);
}

TEST_CASE("data: mask_to_boxes finds tight component boxes") {
  SUBCASE("solid 2x3 blob") {
    std::vector<std::pair<int, int>> on;
    for (int y = 4; y <= 5; ++y)
      for (int x = 7; x <= 9; ++x) on.push_back({y, x});
    std::vector<BoxAnnotation> boxes = mask_to_boxes(make_mask(12, 12, on), 12, 12);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].x1 == 7);
    CHECK(boxes[0].y1 == 4);
    CHECK(boxes[0].x2 == 9);
    CHECK(boxes[0].y2 == 5);
    CHECK(boxes[0].area == 6);
    CHECK(boxes[0].cx == doctest::Approx(8.0));
    CHECK(boxes[0].cy == doctest::Approx(4.5));
    CHECK(boxes[0].pixel_w() == 3);
    CHECK(boxes[0].pixel_h() == 2);
  }

  SUBCASE("empty mask") {
    CHECK(mask_to_boxes(make_mask(5, 5, {}), 5, 5).empty());
  }

  SUBCASE("diagonal touch is one component") {
    std::vector<BoxAnnotation> boxes =
        mask_to_boxes(make_mask(6, 6, {{1, 1}, {2, 2}, {3, 3}}), 6, 6);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].area == 3);
    CHECK(boxes[0].x1 == 1);
    CHECK(boxes[0].x2 == 3);
  }

  SUBCASE("non-binary masks are rejected") {
    std::vector<uint8_t> bad(25, 0);
    bad[7] = 2;
    CHECK_THROWS_AS((void)mask_to_boxes(bad, 5, 5), std::invalid_argument);
    std::vector<uint8_t> byte255(25, 0);
    byte255[3] = 255;
    CHECK_THROWS_AS((void)mask_to_boxes(byte255, 5, 5),
                    std::invalid_argument);
  }

  SUBCASE("size mismatch is rejected") {
    CHECK_THROWS_AS((void)mask_to_boxes(std::vector<uint8_t>(24, 0), 5, 5),
                    std::invalid_argument);
  }
}

TEST_CASE("data: mask_to_boxes agrees with a flood-fill oracle") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> bit(0, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 14, w = 17;
    std::vector<uint8_t> mask((size_t)h * w);
    for (auto& v : mask) v = bit(rng) == 0 ? 1 : 0;

    std::vector<BoxAnnotation> got = mask_to_boxes(mask, h, w);
    std::vector<oracle::OracleBox> want = oracle::components(mask, h, w);
    REQUIRE(got.size() == want.size());

    auto key_got = [](const BoxAnnotation& b) {
      return std::tuple<int, int, int, int, int>(b.x1, b.y1, b.x2, b.y2,
                                                 b.area);
    };
    auto key_want = [](const oracle::OracleBox& b) {
      return std::tuple<int, int, int, int, int>(b.x1, b.y1, b.x2, b.y2,
                                                 b.area);
    };
    std::vector<std::tuple<int, int, int, int, int>> gk, wk;
    std::vector<std::pair<double, double>> gc, wc;
    for (const auto& b : got) gk.push_back(key_got(b));
    for (const auto& b : want) wk.push_back(key_want(b));
    std::sort(gk.begin(), gk.end());
    std::sort(wk.begin(), wk.end());
    CHECK(gk == wk);

    // centroids, matched through the sorted key order
    std::sort(got.begin(), got.end(), [&](const auto& a, const auto& b) {
      return key_got(a) < key_got(b);
    });
    std::sort(want.begin(), want.end(), [&](const auto& a, const auto& b) {
      return key_want(a) < key_want(b);
    });
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].cx == doctest::Approx(want[i].cx));
      CHECK(got[i].cy == doctest::Approx(want[i].cy));
    }
  }
}

TEST_CASE("data: disjoint rectangles round-trip through mask_to_boxes") {
  std::vector<std::pair<int, int>> on;
  auto fill = [&](int x1, int y1, int x2, int y2) {
    for (int y = y1; y <= y2; ++y)
      for (int x = x1; x <= x2; ++x) on.push_back({y, x});
  };
  fill(2, 3, 5, 6);
  fill(10, 1, 12, 2);
  fill(8, 10, 14, 13);
  std::vector<BoxAnnotation> boxes = mask_to_boxes(make_mask(16, 16, on), 16, 16);
  REQUIRE(boxes.size() == 3);
  std::set<std::tuple<int, int, int, int>> got;
  for (const auto& b : boxes) got.insert({b.x1, b.y1, b.x2, b.y2});
  CHECK(got.count({2, 3, 5, 6}) == 1);
  CHECK(got.count({10, 1, 12, 2}) == 1);
  CHECK(got.count({8, 10, 14, 13}) == 1);
}

TEST_CASE("data: split_dataset floors the train fraction deterministically") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("img_" + std::to_string(i));

  auto [train, val] = split_dataset(ids, 0.7, 99);
  CHECK(train.size() == 7);
  CHECK(val.size() == 3);

  SUBCASE("same seed reproduces, different seed reshuffles") {
    auto [t2, v2] = split_dataset(ids, 0.7, 99);
    CHECK(t2 == train);
    CHECK(v2 == val);
    bool any_diff = false;
    for (uint64_t s = 100; s < 108 && !any_diff; ++s) {
      auto [t3, v3] = split_dataset(ids, 0.7, s);
      any_diff = t3 != train;
    }
    CHECK(any_diff);
  }

  SUBCASE("train and val are a disjoint partition") {
    std::set<std::string> all(train.begin(), train.end());
    for (const auto& id : val) CHECK(all.insert(id).second);
    CHECK(all.size() == ids.size());
  }

  SUBCASE("input order does not matter") {
    std::vector<std::string> shuffled = ids;
    std::reverse(shuffled.begin(), shuffled.end());
    auto [t2, v2] = split_dataset(shuffled, 0.7, 99);
    CHECK(t2 == train);
    CHECK(v2 == val);
  }

  SUBCASE("dataset-sized split") {
    std::vector<std::string> big;
    for (int i = 0; i < 427; ++i) big.push_back("s" + std::to_string(i));
    auto [tb, vb] = split_dataset(big, 0.7, 1);
    CHECK(tb.size() == 298);
    CHECK(vb.size() == 129);
  }

  SUBCASE("duplicates and empty lists are rejected") {
    std::vector<std::string> dup{"a", "b", "a"};
    CHECK_THROWS_AS((void)split_dataset(dup, 0.7, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)split_dataset({}, 0.7, 1), std::invalid_argument);
  }
}

TEST_CASE("data: augment keeps mask and boxes mutually consistent") {
  std::vector<std::pair<int, int>> on;
  for (int y = 10; y <= 12; ++y)
    for (int x = 20; x <= 23; ++x) on.push_back({y, x});
  for (int y = 30; y <= 31; ++y)
    for (int x = 5; x <= 6; ++x) on.push_back({y, x});
  Sample s = make_sample(40, 48, make_mask(40, 48, on));

  for (uint32_t seed = 0; seed < 24; ++seed) {
    std::mt19937 rng(seed);
    Sample a = augment(s, rng);

    // boxes always re-derivable from the augmented mask
    std::vector<BoxAnnotation> rederived =
        mask_to_boxes(a.mask, a.height(), a.width());
    CHECK(boxes_equal(a.boxes, rederived));

    // a nonempty sample never augments to an empty one
    CHECK_FALSE(a.boxes.empty());

    CHECK(a.image.h == (int)(a.mask.size() / a.image.w));
    for (const auto& b : a.boxes) {
      CHECK(b.x1 >= 0);
      CHECK(b.y1 >= 0);
      CHECK(b.x2 < a.width());
      CHECK(b.y2 < a.height());
    }
  }
}

TEST_CASE("data: augment is deterministic and varied across seeds") {
  std::vector<std::pair<int, int>> on;
  for (int y = 8; y <= 10; ++y)
    for (int x = 8; x <= 10; ++x) on.push_back({y, x});
  Sample s = make_sample(32, 32, make_mask(32, 32, on));

  std::mt19937 r1(7), r2(7);
  Sample a = augment(s, r1);
  Sample b = augment(s, r2);
  CHECK(a.image.data == b.image.data);
  CHECK(a.mask == b.mask);
  CHECK(boxes_equal(a.boxes, b.boxes));

  std::set<std::pair<int, int>> shapes;
  std::set<std::vector<float>> images;
  for (uint32_t seed = 0; seed < 16; ++seed) {
    std::mt19937 rng(seed);
    Sample out = augment(s, rng);
    shapes.insert({out.height(), out.width()});
    images.insert(out.image.data);
  }
  // different seeds explore different crops
  CHECK(shapes.size() > 1);
  CHECK(images.size() > 1);
}

TEST_CASE("data: augment retries crops that would drop every target") {
  // single small target in a corner: most crops miss it, the sample must
  // still come back with its target
  Sample s = make_sample(48, 48, make_mask(48, 48, {{2, 2}, {2, 3}}));
  for (uint32_t seed = 0; seed < 50; ++seed) {
    std::mt19937 rng(seed);
    Sample a = augment(s, rng);
    CHECK(a.boxes.size() == 1);
  }

  SUBCASE("empty samples pass through without retry loops") {
    Sample empty = make_sample(32, 32, make_mask(32, 32, {}));
    std::mt19937 rng(3);
    Sample a = augment(empty, rng);
    CHECK(a.boxes.empty());
    for (uint8_t v : a.mask) CHECK(v == 0);
  }
}

TEST_CASE("data: resize_sample identity and scaling") {
  std::vector<std::pair<int, int>> on;
  for (int y = 12; y <= 19; ++y)
    for (int x = 8; x <= 15; ++x) on.push_back({y, x});
  Sample s = make_sample(32, 32, make_mask(32, 32, on));

  SUBCASE("identity resize returns the sample unchanged") {
    Sample r = resize_sample(s, 32, 32);
    CHECK(r.image.data == s.image.data);
    CHECK(r.mask == s.mask);
    CHECK(boxes_equal(r.boxes, s.boxes));
  }

  SUBCASE("halving scales boxes down") {
    Sample r = resize_sample(s, 16, 16);
    CHECK(r.image.h == 16);
    CHECK(r.mask.size() == 256);
    REQUIRE(r.boxes.size() == 1);
    CHECK(r.boxes[0].x1 == 4);
    CHECK(r.boxes[0].y1 == 6);
    CHECK(r.boxes[0].x2 == 7);
    CHECK(r.boxes[0].y2 == 9);

    // the scaled box encloses the resized component
    std::vector<BoxAnnotation> comps = mask_to_boxes(r.mask, 16, 16);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].x1 >= r.boxes[0].x1);
    CHECK(comps[0].y1 >= r.boxes[0].y1);
    CHECK(comps[0].x2 <= r.boxes[0].x2);
    CHECK(comps[0].y2 <= r.boxes[0].y2);
  }

  SUBCASE("upscale doubles the extents") {
    Sample r = resize_sample(s, 64, 64);
    REQUIRE(r.boxes.size() == 1);
    CHECK(r.boxes[0].x1 == 16);
    CHECK(r.boxes[0].x2 == 31);
    std::vector<BoxAnnotation> comps = mask_to_boxes(r.mask, 64, 64);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].area == 256);
  }

  SUBCASE("components lost to downsampling drop their boxes") {
    Sample tiny = make_sample(16, 16, make_mask(16, 16, {{3, 3}}));
    Sample r = resize_sample(tiny, 2, 2);
    CHECK(r.boxes.empty());
    for (uint8_t v : r.mask) CHECK(v == 0);
  }

  SUBCASE("invalid targets are rejected") {
    CHECK_THROWS_AS((void)resize_sample(s, 0, 16), std::invalid_argument);
    CHECK_THROWS_AS((void)resize_sample(s, 16, -4), std::invalid_argument);
  }
}

TEST_CASE("data: resized boxes stay consistent on random masks") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> col(2, 24), ext(0, 3);
  for (int trial = 0; trial < 10; ++trial) {
    // one blob per 10-row band keeps components at least 6 rows apart, so
    // even the strongest downscale below cannot merge them
    std::vector<std::pair<int, int>> on;
    for (int blob = 0; blob < 3; ++blob) {
      const int y0 = 10 * blob + 2, x0 = col(rng);
      const int y1 = y0 + ext(rng), x1 = std::min(29, x0 + ext(rng));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) on.push_back({y, x});
    }
    Sample s = make_sample(30, 30, make_mask(30, 30, on));
    for (int target : {13, 20, 45}) {
      Sample r = resize_sample(s, target, target);
      std::vector<BoxAnnotation> comps =
          mask_to_boxes(r.mask, target, target);
      CHECK(r.boxes.size() == comps.size());
      for (const auto& b : r.boxes) {
        CHECK(b.x1 >= 0);
        CHECK(b.y1 >= 0);
        CHECK(b.x2 < target);
        CHECK(b.y2 < target);
      }
    }
  }
}

TEST_CASE("data: synthetic scenes are deterministic and well-formed") {
  SynthConfig cfg;
  cfg.count = 6;
  cfg.image_size = 64;
  cfg.min_targets = 1;
  cfg.max_targets = 3;
  cfg.seed = 11;

  std::vector<Sample> a = synth_generate(cfg);
  std::vector<Sample> b = synth_generate(cfg);
  REQUIRE(a.size() == 6);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].image.data == b[i].image.data);
    CHECK(a[i].mask == b[i].mask);
    CHECK(boxes_equal(a[i].boxes, b[i].boxes));

    const size_t n_targets = a[i].boxes.size();
    CHECK(n_targets >= 1);
    CHECK(n_targets <= 3);
    CHECK(boxes_equal(a[i].boxes, mask_to_boxes(a[i].mask, 64, 64)));
    for (float v : a[i].image.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }

  SUBCASE("seed changes the dataset") {
    SynthConfig other = cfg;
    other.seed = 12;
    std::vector<Sample> c = synth_generate(other);
    CHECK(c[0].image.data != a[0].image.data);
  }

  SUBCASE("single sigma-1.5 target has a small box") {
    SynthConfig one = cfg;
    one.count = 8;
    one.min_targets = 1;
    one.max_targets = 1;
    one.sigma_min = 1.5f;
    one.sigma_max = 1.5f;
    for (const auto& s : synth_generate(one)) {
      REQUIRE(s.boxes.size() == 1);
      CHECK(s.boxes[0].pixel_w() >= 3);
      CHECK(s.boxes[0].pixel_w() <= 7);
      CHECK(s.boxes[0].pixel_h() >= 3);
      CHECK(s.boxes[0].pixel_h() <= 7);
    }
  }

  SUBCASE("targets too large for the image are rejected") {
    SynthConfig bad = cfg;
    bad.image_size = 16;
    bad.sigma_min = 20.0f;
    bad.sigma_max = 30.0f;
    CHECK_THROWS((void)synth_generate(bad));
  }
}

TEST_CASE("data: gray tensor conversion round trip") {
  std::vector<uint8_t> pixels(6 * 5);
  for (size_t i = 0; i < pixels.size(); ++i) pixels[i] = (uint8_t)(i * 8);
  Tensor t = gray_to_tensor(pixels, 6, 5, 1);
  CHECK(t.c == 1);
  CHECK(t.h == 6);
  CHECK(t.w == 5);
  CHECK(t.data[0] == doctest::Approx(0.0));
  CHECK(t.data[1] == doctest::Approx(8.0 / 255.0));
  CHECK(tensor_to_gray(t, 0) == pixels);

  SUBCASE("channel replication") {
    Tensor three = gray_to_tensor(pixels, 6, 5, 3);
    CHECK(three.c == 3);
    CHECK(three.at(0, 0, 2, 2) == three.at(0, 2, 2, 2));
  }
}

TEST_CASE("data: dataset save and load round trip") {
  SynthConfig cfg;
  cfg.count = 4;
  cfg.image_size = 48;
  cfg.seed = 21;
  std::vector<Sample> samples = synth_generate(cfg);

  TempDir dir;
  save_dataset(samples, dir.path.string());
  write_annotations(samples, dir.path.string());

  std::vector<Sample> loaded = load_dataset(dir.path.string());
  REQUIRE(loaded.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].id == samples[i].id);
    // synthesis quantizes to 8 bits, so the files reproduce memory exactly
    CHECK(loaded[i].image.data == samples[i].image.data);
    CHECK(loaded[i].mask == samples[i].mask);
    CHECK(boxes_equal(loaded[i].boxes, samples[i].boxes));
  }

  SUBCASE("split files round trip") {
    std::vector<std::string> train{samples[0].id, samples[2].id};
    std::vector<std::string> val{samples[1].id, samples[3].id};
    write_split(dir.path.string(), train, val);
    auto [rt, rv] = read_split(dir.path.string());
    CHECK(rt == train);
    CHECK(rv == val);
  }

  SUBCASE("missing masks are reported by id") {
    std::filesystem::remove(dir.path / "masks" / (samples[1].id + ".png"));
    std::filesystem::remove(dir.path / "masks" / (samples[2].id + ".png"));
    try {
      (void)load_dataset(dir.path.string());
      FAIL("expected an error for missing masks");
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      CHECK(msg.find(samples[1].id) != std::string::npos);
      CHECK(msg.find(samples[2].id) != std::string::npos);
    }
  }

  SUBCASE("gray masks are rejected with the offending id") {
    GrayImage m = read_png_gray(
        (dir.path / "masks" / (samples[0].id + ".png")).string());
    m.pixels[10] = 128;
    write_png_gray((dir.path / "masks" / (samples[0].id + ".png")).string(),
                   m.width, m.height, m.pixels);
    try {
      (void)load_dataset(dir.path.string());
      FAIL("expected an error for non-binary mask values");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find(samples[0].id) != std::string::npos);
    }
  }
}
