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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "thermaug/annotations.hpp"
#include "thermaug/raster.hpp"

namespace thermaug {

/// Pre-rendered object: intensities plus a visibility mask of equal extent.
/// native_height is the on-screen height in pixels at perspective factor 1.
struct Sprite {
  GrayImage image;
  Mask mask;
  int category_id = 0;
  double native_height = 0;
};

/// Throws ValidationError unless extents match, the mask is non-empty and
/// native_height is positive.
void validate_sprite(const Sprite &s);

struct Placement {
  std::size_t sprite_index = 0;
  /// Top-left of the scaled sprite; may lie outside the image.
  int x = 0;
  int y = 0;
  double scale = 1.0;
};

/// Tight rectangle of the set bits. Throws EmptyMask if none are set.
Rect bbox_from_mask(const Mask &mask);

/// Extent of a sprite after nearest-neighbour scaling (each side >= 1).
Rect scaled_extent(const Sprite &sprite, const Placement &placement);

struct CompositeResult {
  GrayImage image;
  /// Only category_id, bbox and source are meaningful; ids are assigned by the caller.
  Annotation annotation;
  /// Background extent; marks exactly the pixels written from the sprite.
  Mask mask;
};

/// Pastes one scaled sprite. Throws NoVisiblePixels when nothing lands inside
/// the background.
CompositeResult composite_one(const GrayImage &background, const Sprite &sprite, const Placement &placement);

struct CountRange {
  int min = 0;
  int max = 0;
};

struct CompositeRecipe {
  /// Background pool and the directory its file names are relative to.
  Dataset backgrounds;
  std::filesystem::path background_root;
  std::vector<Sprite> sprites;
  /// Instance count range per category id.
  std::map<int, CountRange> counts;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  /// Vertical range for the sprite's bottom edge, [band_top, band_bottom].
  int band_top = 0;
  int band_bottom = 0;
  /// Perspective factor at band_top and at band_bottom; linear in between.
  double scale_top = 1.0;
  double scale_bottom = 1.0;
  double max_iou = 0.3;
  int retry_budget = 100;
  /// ".png" or ".pgm" for emitted frames.
  std::string image_extension = ".png";
  std::string name_prefix = "synth";
};

void validate_recipe(const CompositeRecipe &recipe);

struct SynthImage {
  GrayImage image;
  Mask union_mask;
  std::vector<Mask> object_masks;
  std::vector<Annotation> annotations;
  std::size_t background_index = 0;
};

/// Generates output image `index` of the recipe. Pure function of
/// (recipe, index); the background is supplied already decoded.
SynthImage generate_one(const CompositeRecipe &recipe, std::size_t index, const GrayImage &background,
                        std::size_t background_index);

/// Which background image output `index` uses.
std::size_t background_for(const CompositeRecipe &recipe, std::size_t index);

struct SynthSetSummary {
  Dataset dataset;
  std::filesystem::path dataset_path;
};

/// Writes <out>/images/, <out>/masks/ and <out>/dataset.json. Output is
/// identical for any worker count.
SynthSetSummary generate_synth_set(const CompositeRecipe &recipe, const std::filesystem::path &out_dir,
                                   unsigned workers = 1);

/// JSON array of {image, mask, category_id, native_height}; paths relative to the manifest.
std::vector<Sprite> load_sprite_manifest(const std::filesystem::path &path);

/// Recipe file; relative paths resolve against the recipe's directory.
CompositeRecipe load_recipe(const std::filesystem::path &path);

}  // namespace thermaug
