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
#include "thermaug/compositor.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "thermaug/error.hpp"
#include "thermaug/image_io.hpp"
#include "thermaug/parallel.hpp"
#include "thermaug/random.hpp"

namespace thermaug {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double rect_iou(const Rect &a, const Rect &b) {
  const long long inter = intersect(a, b).area();
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

struct ScaledSprite {
  GrayImage image;
  Mask mask;
};

ScaledSprite scale_sprite(const Sprite &sprite, const Rect &ext) {
  if (ext.w == sprite.image.cols() && ext.h == sprite.image.rows()) return {sprite.image, sprite.mask};
  return {resize_nearest(sprite.image, ext.w, ext.h), resize_nearest(sprite.mask, ext.w, ext.h)};
}

std::string frame_name(const CompositeRecipe &r, std::size_t index, const std::string &ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%06zu", index);
  return r.name_prefix + buf + ext;
}

}  // namespace

void validate_sprite(const Sprite &s) {
  if (s.image.size() == 0) raise(ErrorCode::kValidationError, "sprite image is empty");
  if (!same_extent(s.image, s.mask)) raise(ErrorCode::kValidationError, "sprite image and mask extents differ");
  if (!s.mask.any()) raise(ErrorCode::kValidationError, "sprite mask has no set pixels");
  if (!(s.native_height > 0)) raise(ErrorCode::kValidationError, "sprite native_height must be positive");
}

Rect bbox_from_mask(const Mask &mask) {
  const auto rows = mask.rowwise().any().eval();
  const auto cols = mask.colwise().any().eval();
  if (!rows.any()) raise(ErrorCode::kEmptyMask, "mask has no set pixels");
  int y0 = 0;
  while (!rows(y0)) ++y0;
  int y1 = static_cast<int>(rows.size()) - 1;
  while (!rows(y1)) --y1;
  int x0 = 0;
  while (!cols(x0)) ++x0;
  int x1 = static_cast<int>(cols.size()) - 1;
  while (!cols(x1)) --x1;
  return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

Rect scaled_extent(const Sprite &sprite, const Placement &p) {
  const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(sprite.image.cols()) * p.scale)));
  const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(sprite.image.rows()) * p.scale)));
  return Rect{p.x, p.y, w, h};
}

CompositeResult composite_one(const GrayImage &background, const Sprite &sprite, const Placement &placement) {
  if (!same_extent(sprite.image, sprite.mask) || sprite.image.size() == 0)
    raise(ErrorCode::kValidationError, "sprite image and mask extents differ");
  if (!(placement.scale > 0)) raise(ErrorCode::kInvalidArgument, "placement scale must be positive");

  const Rect ext = scaled_extent(sprite, placement);
  const Rect dst = intersect(ext, extent_of(background));
  CompositeResult out{background, Annotation{}, Mask::Zero(background.rows(), background.cols())};
  if (!dst.empty()) {
    const ScaledSprite s = scale_sprite(sprite, ext);
    const auto src_mask = s.mask.block(dst.y - ext.y, dst.x - ext.x, dst.h, dst.w);
    const auto src_img = s.image.block(dst.y - ext.y, dst.x - ext.x, dst.h, dst.w);
    auto dst_img = out.image.block(dst.y, dst.x, dst.h, dst.w);
    dst_img = src_mask.select(src_img, dst_img);
    out.mask.block(dst.y, dst.x, dst.h, dst.w) = src_mask;
  }
  if (!out.mask.any())
    raise(ErrorCode::kNoVisiblePixels, "sprite at (" + std::to_string(placement.x) + "," +
                                           std::to_string(placement.y) + ") has no visible pixels");
  out.annotation.category_id = sprite.category_id;
  out.annotation.bbox = to_bbox(bbox_from_mask(out.mask));
  out.annotation.source = Source::kSynth;
  return out;
}

void validate_recipe(const CompositeRecipe &r) {
  if (!(r.max_iou >= 0.0 && r.max_iou <= 1.0)) raise(ErrorCode::kValidationError, "max_iou must lie in [0,1]");
  if (r.retry_budget < 1) raise(ErrorCode::kValidationError, "retry_budget must be >= 1");
  if (r.band_top < 0 || r.band_bottom < r.band_top)
    raise(ErrorCode::kValidationError, "placement band must satisfy 0 <= top <= bottom");
  if (!(r.scale_top > 0 && r.scale_bottom > 0)) raise(ErrorCode::kValidationError, "scale endpoints must be positive");
  if (r.image_extension != ".png" && r.image_extension != ".pgm")
    raise(ErrorCode::kValidationError, "image format must be png or pgm");
  for (const auto &s : r.sprites) {
    validate_sprite(s);
    if (!r.backgrounds.find_category(s.category_id))
      raise(ErrorCode::kValidationError,
            "sprite category " + std::to_string(s.category_id) + " is not in the background dataset");
  }
  for (const auto &[cat, range] : r.counts) {
    if (range.min < 0 || range.max < range.min)
      raise(ErrorCode::kValidationError, "instance range for category " + std::to_string(cat) + " is invalid");
    if (!r.backgrounds.find_category(cat))
      raise(ErrorCode::kValidationError, "category " + std::to_string(cat) + " is not in the background dataset");
    if (range.max > 0 && std::none_of(r.sprites.begin(), r.sprites.end(),
                                      [cat = cat](const Sprite &s) { return s.category_id == cat; }))
      raise(ErrorCode::kEmptySpriteLibrary, "no sprites for category " + std::to_string(cat));
  }
  if (r.sample_count > 0 && r.backgrounds.images.empty())
    raise(ErrorCode::kValidationError, "background dataset has no images");
  for (const auto &img : r.backgrounds.images)
    if (r.band_bottom > img.height)
      raise(ErrorCode::kValidationError, "placement band exceeds the height of background " + img.file_name);
}

std::size_t background_for(const CompositeRecipe &recipe, std::size_t index) {
  Rng rng(derive_key(recipe.seed, {0xb6, index}));
  return static_cast<std::size_t>(rng.below(recipe.backgrounds.images.size()));
}

SynthImage generate_one(const CompositeRecipe &recipe, std::size_t index, const GrayImage &background,
                        std::size_t background_index) {
  Rng rng(derive_key(recipe.seed, {0x5c, index}));
  const Rect frame = extent_of(background);

  std::vector<int> plan;
  for (const auto &[cat, range] : recipe.counts) {
    const auto n = rng.between(range.min, range.max);
    for (std::int64_t k = 0; k < n; ++k) plan.push_back(cat);
  }

  struct Accepted {
    Placement placement;
    Rect footprint;
    int bottom;
  };
  std::vector<Accepted> accepted;
  for (int cat : plan) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < recipe.sprites.size(); ++i)
      if (recipe.sprites[i].category_id == cat) candidates.push_back(i);
    const std::size_t sprite_index = candidates[rng.below(candidates.size())];
    const Sprite &sprite = recipe.sprites[sprite_index];

    bool placed = false;
    for (int attempt = 0; attempt < recipe.retry_budget && !placed; ++attempt) {
      const int bottom = static_cast<int>(rng.between(recipe.band_top, recipe.band_bottom));
      const int band = recipe.band_bottom - recipe.band_top;
      const double t = band > 0 ? static_cast<double>(bottom - recipe.band_top) / band : 1.0;
      const double factor = recipe.scale_top + t * (recipe.scale_bottom - recipe.scale_top);
      Placement p{sprite_index, 0, 0, sprite.native_height * factor / static_cast<double>(sprite.image.rows())};
      const Rect ext = scaled_extent(sprite, p);
      const int cx = static_cast<int>(rng.between(0, frame.w - 1));
      p.x = cx - ext.w / 2;
      p.y = bottom - ext.h;

      const Mask scaled = resize_nearest(sprite.mask, ext.w, ext.h);
      const Rect vis = intersect(Rect{p.x, p.y, ext.w, ext.h}, frame);
      if (vis.empty() || !scaled.block(vis.y - p.y, vis.x - p.x, vis.h, vis.w).any()) continue;
      Rect footprint = bbox_from_mask(scaled);
      footprint = intersect(Rect{footprint.x + p.x, footprint.y + p.y, footprint.w, footprint.h}, frame);
      const bool clear = std::all_of(accepted.begin(), accepted.end(), [&](const Accepted &a) {
        return rect_iou(a.footprint, footprint) <= recipe.max_iou;
      });
      if (!clear) continue;
      accepted.push_back(Accepted{p, footprint, bottom});
      placed = true;
    }
    if (!placed)
      raise(ErrorCode::kPlacementExhausted, "image " + std::to_string(index) + ": no placement for category " +
                                                std::to_string(cat) + " within " +
                                                std::to_string(recipe.retry_budget) + " attempts");
  }

  // Far (smaller bottom y) to near; nearer sprites overwrite.
  std::stable_sort(accepted.begin(), accepted.end(),
                   [](const Accepted &a, const Accepted &b) { return a.bottom < b.bottom; });

  SynthImage out;
  out.image = background;
  out.background_index = background_index;
  out.union_mask = Mask::Zero(background.rows(), background.cols());
  std::vector<Mask> masks;
  std::vector<int> cats;
  for (const auto &a : accepted) {
    const Sprite &sprite = recipe.sprites[a.placement.sprite_index];
    CompositeResult r = composite_one(out.image, sprite, a.placement);
    for (auto &m : masks) m = m && !r.mask;
    out.image = std::move(r.image);
    out.union_mask = out.union_mask || r.mask;
    masks.push_back(std::move(r.mask));
    cats.push_back(sprite.category_id);
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (!masks[i].any()) continue;
    Annotation ann;
    ann.category_id = cats[i];
    ann.bbox = to_bbox(bbox_from_mask(masks[i]));
    ann.source = Source::kSynth;
    out.annotations.push_back(ann);
    out.object_masks.push_back(std::move(masks[i]));
  }
  return out;
}

SynthSetSummary generate_synth_set(const CompositeRecipe &recipe, const fs::path &out_dir, unsigned workers) {
  validate_recipe(recipe);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());

  struct Produced {
    ImageRecord record;
    std::vector<Annotation> annotations;
  };
  std::vector<Produced> produced(recipe.sample_count);
  parallel_for(recipe.sample_count, workers, [&](std::size_t i) {
    const std::size_t bg = background_for(recipe, i);
    const ImageRecord &bg_rec = recipe.backgrounds.images[bg];
    GrayImage background = load_image(recipe.background_root / bg_rec.file_name);
    if (width(background) != bg_rec.width || height(background) != bg_rec.height)
      raise(ErrorCode::kValidationError, "background " + bg_rec.file_name + " does not match its recorded extent");
    SynthImage s = generate_one(recipe, i, background, bg);

    Produced &p = produced[i];
    p.record.id = static_cast<std::int64_t>(i) + 1;
    p.record.file_name = "images/" + frame_name(recipe, i, recipe.image_extension);
    p.record.mask_file = "masks/" + frame_name(recipe, i, ".png");
    p.record.width = width(s.image);
    p.record.height = height(s.image);
    save_image(s.image, out_dir / p.record.file_name);
    save_mask(s.union_mask, out_dir / p.record.mask_file);
    p.annotations = std::move(s.annotations);
  });

  SynthSetSummary summary;
  Dataset &ds = summary.dataset;
  ds.categories = recipe.backgrounds.categories;
  std::int64_t next_ann = 1;
  for (auto &p : produced) {
    for (auto &a : p.annotations) {
      a.id = next_ann++;
      a.image_id = p.record.id;
      ds.annotations.push_back(a);
    }
    ds.images.push_back(std::move(p.record));
  }
  summary.dataset_path = out_dir / "dataset.json";
  write_dataset(ds, summary.dataset_path);
  return summary;
}

std::vector<Sprite> load_sprite_manifest(const fs::path &path) {
  const std::string text = read_text_file(path);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    raise(ErrorCode::kSyntaxError, path.string() + ": " + e.what());
  }
  if (!root.is_array()) raise(ErrorCode::kSchemaError, path.string() + ": sprite manifest must be a JSON array");
  const fs::path base = path.parent_path();
  std::vector<Sprite> sprites;
  for (const json &j : root) {
    const std::string where = path.string() + ": sprite " + std::to_string(sprites.size());
    if (!j.is_object() || !j.contains("image") || !j["image"].is_string() || !j.contains("mask") ||
        !j["mask"].is_string() || !j.contains("category_id") || !j["category_id"].is_number_integer() ||
        !j.contains("native_height") || !j["native_height"].is_number())
      raise(ErrorCode::kSchemaError, where + " needs image, mask, category_id and native_height");
    Sprite s;
    s.image = load_image(base / j["image"].get<std::string>());
    s.mask = load_mask(base / j["mask"].get<std::string>());
    s.category_id = j["category_id"].get<int>();
    s.native_height = j["native_height"].get<double>();
    try {
      validate_sprite(s);
    } catch (const Error &e) {
      throw Error(e.code(), where + ": " + e.detail());
    }
    sprites.push_back(std::move(s));
  }
  return sprites;
}

namespace {

CompositeRecipe recipe_from_json(const fs::path &path, const json &j);

}  // namespace

CompositeRecipe load_recipe(const fs::path &path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    raise(ErrorCode::kSyntaxError, path.string() + ": " + e.what());
  }
  try {
    return recipe_from_json(path, j);
  } catch (const json::exception &e) {
    raise(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

namespace {

CompositeRecipe recipe_from_json(const fs::path &path, const json &j) {
  const std::string where = path.string();
  auto require = [&](const char *key) -> const json & {
    if (!j.is_object() || !j.contains(key)) raise(ErrorCode::kSchemaError, where + ": missing \"" + key + "\"");
    return j[key];
  };
  auto as_pair = [&](const char *key, auto &a, auto &b) {
    const json &v = require(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      raise(ErrorCode::kSchemaError, where + ": \"" + key + "\" must be a pair of numbers");
    a = v[0].get<std::remove_reference_t<decltype(a)>>();
    b = v[1].get<std::remove_reference_t<decltype(b)>>();
  };

  const fs::path base = path.parent_path();
  CompositeRecipe r;
  const json &bg = require("backgrounds");
  const json &sp = require("sprites");
  if (!bg.is_string() || !sp.is_string())
    raise(ErrorCode::kSchemaError, where + ": backgrounds and sprites must be paths");
  DatasetOptions opts;
  opts.allow_unknown_categories = j.value("allow_unknown_categories", false);
  const fs::path bg_path = base / bg.get<std::string>();
  r.backgrounds = parse_dataset(bg_path, opts);
  r.background_root = j.contains("background_root") ? base / j["background_root"].get<std::string>()
                                                    : bg_path.parent_path();
  r.sprites = load_sprite_manifest(base / sp.get<std::string>());

  const json &counts = require("counts");
  if (!counts.is_object()) raise(ErrorCode::kSchemaError, where + ": counts must map category names to [min,max]");
  for (const auto &[name, range] : counts.items()) {
    const Category *c = r.backgrounds.find_category(name);
    if (!c) raise(ErrorCode::kValidationError, where + ": unknown category \"" + name + "\" in counts");
    if (!range.is_array() || range.size() != 2 || !range[0].is_number_integer() || !range[1].is_number_integer())
      raise(ErrorCode::kSchemaError, where + ": counts." + name + " must be [min,max]");
    r.counts[c->id] = CountRange{range[0].get<int>(), range[1].get<int>()};
  }
  const json &n = require("sample_count");
  if (!n.is_number_unsigned()) raise(ErrorCode::kSchemaError, where + ": sample_count must be a non-negative integer");
  r.sample_count = n.get<std::size_t>();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) raise(ErrorCode::kSchemaError, where + ": seed must be a non-negative integer");
    r.seed = j["seed"].get<std::uint64_t>();
  }
  as_pair("band", r.band_top, r.band_bottom);
  if (j.contains("scale")) as_pair("scale", r.scale_top, r.scale_bottom);
  r.max_iou = j.value("max_iou", r.max_iou);
  r.retry_budget = j.value("retry_budget", r.retry_budget);
  r.image_extension = "." + j.value("image_format", std::string("png"));
  r.name_prefix = j.value("name_prefix", r.name_prefix);
  try {
    validate_recipe(r);
  } catch (const Error &e) {
    throw Error(e.code(), where + ": " + e.detail());
  }
  return r;
}

}  // namespace

}  // namespace thermaug
