/**
 * Copyright 2026 The thermaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermaug/annotations.hpp"
#include "thermaug/compositor.hpp"
#include "thermaug/image_io.hpp"
#include "thermaug/random.hpp"
#include "thermaug/raster.hpp"

namespace thermaug::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("thermaug-test-" + std::to_string(stamp) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }
  fs::path operator/(const std::string &rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline GrayImage random_image(Rng &rng, int w, int h) {
  GrayImage img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

/// Random image drawn from a narrow random intensity range, so transforms
/// see skewed histograms too.
inline GrayImage random_skewed_image(Rng &rng, int w, int h) {
  const int lo = static_cast<int>(rng.below(256));
  const int hi = lo + static_cast<int>(rng.below(256 - lo));
  GrayImage img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i)
    img.data()[i] = static_cast<std::uint8_t>(rng.between(lo, hi));
  return img;
}

inline Mask random_mask(Rng &rng, int w, int h, double density) {
  Mask m(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < density;
  return m;
}

/// Smooth gradient plus noise, a stand-in for a thermal road scene.
inline GrayImage scene_image(Rng &rng, int w, int h) {
  GrayImage img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img(y, x) = static_cast<std::uint8_t>(std::clamp<int>(40 + 80 * y / h + static_cast<int>(rng.below(24)), 0, 255));
  return img;
}

/// Writes <dir>/images/frame_NNN.png and <dir>/dataset.json. Each frame has
/// `objects_per_image` bright rectangles annotated as real persons or cars.
inline fs::path write_scene_dataset(const fs::path &dir, int count, int w, int h, std::uint64_t seed,
                                    int objects_per_image = 1) {
  Rng rng(seed);
  Dataset ds;
  ds.categories = default_categories();
  std::int64_t ann_id = 1;
  for (int i = 0; i < count; ++i) {
    GrayImage img = scene_image(rng, w, h);
    ImageRecord rec;
    rec.id = i + 1;
    char name[32];
    std::snprintf(name, sizeof(name), "images/frame_%03d.png", i);
    rec.file_name = name;
    rec.width = w;
    rec.height = h;
    for (int k = 0; k < objects_per_image; ++k) {
      const int bw = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(w / 4)));
      const int bh = 4 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h / 4)));
      const int bx = static_cast<int>(rng.below(static_cast<std::uint64_t>(w - bw)));
      const int by = static_cast<int>(rng.below(static_cast<std::uint64_t>(h - bh)));
      img.block(by, bx, bh, bw).setConstant(static_cast<std::uint8_t>(200 + rng.below(50)));
      Annotation a;
      a.id = ann_id++;
      a.image_id = rec.id;
      a.category_id = rng.below(2) == 0 ? 1 : 3;
      a.bbox = BoundingBox{double(bx), double(by), double(bw), double(bh)};
      ds.annotations.push_back(a);
    }
    save_image(img, dir / rec.file_name);
    ds.images.push_back(rec);
  }
  write_dataset(ds, dir / "dataset.json");
  return dir / "dataset.json";
}

/// Pedestrian silhouette: head disc over a tapered body, height h.
inline Sprite person_sprite(int w, int h, std::uint8_t heat) {
  Sprite s;
  s.image = GrayImage::Constant(h, w, 0);
  s.mask = Mask::Constant(h, w, false);
  const double cx = (w - 1) / 2.0;
  const double head_r = std::max(1.0, w / 4.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double dy = y - head_r;
      const bool head = dx * dx + dy * dy <= head_r * head_r;
      const double half = (w / 2.0) * (0.5 + 0.5 * static_cast<double>(y) / h);
      const bool body = y > 2 * head_r - 1 && std::fabs(dx) <= half;
      if (head || body) {
        s.mask(y, x) = true;
        s.image(y, x) = static_cast<std::uint8_t>(std::min(255, heat + (y * 7) % 13));
      }
    }
  s.category_id = 1;
  s.native_height = h;
  return s;
}

/// Car silhouette: body rectangle with two hot wheels.
inline Sprite car_sprite(int w, int h, std::uint8_t heat) {
  Sprite s;
  s.image = GrayImage::Constant(h, w, 0);
  s.mask = Mask::Constant(h, w, false);
  const int body_top = h / 4;
  for (int y = body_top; y < h - h / 5; ++y)
    for (int x = 0; x < w; ++x) {
      s.mask(y, x) = true;
      s.image(y, x) = heat;
    }
  for (int y = 0; y < body_top; ++y)
    for (int x = w / 4; x < 3 * w / 4; ++x) {
      s.mask(y, x) = true;
      s.image(y, x) = static_cast<std::uint8_t>(heat - 20);
    }
  for (int y = h - h / 5; y < h; ++y)
    for (int x : {w / 5, 4 * w / 5 - 1}) {
      s.mask(y, x) = true;
      s.image(y, x) = 250;
    }
  s.category_id = 3;
  s.native_height = h;
  return s;
}

/// Writes sprite PNGs and <dir>/sprites.json; returns the manifest path.
inline fs::path write_sprite_library(const fs::path &dir, bool with_cars = true) {
  std::vector<Sprite> sprites = {person_sprite(8, 20, 190), person_sprite(10, 24, 210), person_sprite(7, 18, 230)};
  if (with_cars) {
    sprites.push_back(car_sprite(24, 12, 170));
    sprites.push_back(car_sprite(30, 14, 160));
  }
  nlohmann::json manifest = nlohmann::json::array();
  for (std::size_t i = 0; i < sprites.size(); ++i) {
    const std::string img = "sprite_" + std::to_string(i) + ".png";
    const std::string mask = "sprite_" + std::to_string(i) + "_mask.png";
    save_image(sprites[i].image, dir / img);
    save_mask(sprites[i].mask, dir / mask);
    manifest.push_back({{"image", img},
                        {"mask", mask},
                        {"category_id", sprites[i].category_id},
                        {"native_height", sprites[i].native_height}});
  }
  write_text_file(dir / "sprites.json", manifest.dump(2));
  return dir / "sprites.json";
}

struct RecipeFiles {
  fs::path recipe;
  fs::path backgrounds;
  fs::path sprites;
};

/// A complete recipe on disk: backgrounds, sprites and the recipe JSON.
inline RecipeFiles write_recipe_fixture(const fs::path &dir, std::size_t samples, bool pedestrians_only,
                                        int backgrounds = 6, int w = 96, int h = 64, std::uint64_t seed = 7) {
  RecipeFiles f;
  f.backgrounds = write_scene_dataset(dir / "backgrounds", backgrounds, w, h, seed, 0);
  f.sprites = write_sprite_library(dir / "sprites", !pedestrians_only);
  nlohmann::json counts = {{"person", {1, 3}}};
  counts["car"] = pedestrians_only ? nlohmann::json{0, 0} : nlohmann::json{0, 2};
  nlohmann::json recipe = {{"backgrounds", "backgrounds/dataset.json"},
                           {"sprites", "sprites/sprites.json"},
                           {"counts", counts},
                           {"sample_count", samples},
                           {"seed", seed},
                           {"band", {h / 3, h}},
                           {"scale", {0.6, 1.2}},
                           {"max_iou", 0.3},
                           {"retry_budget", 100}};
  f.recipe = dir / "recipe.json";
  write_text_file(f.recipe, recipe.dump(2));
  return f;
}

}  // namespace thermaug::testing
