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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermaug/raster.hpp"

namespace thermaug {

enum class Source { kReal, kSynth, kTranslated };

std::string_view source_name(Source s);
std::optional<Source> parse_source(std::string_view name);

struct Category {
  int id = 0;
  std::string name;
  friend bool operator==(const Category &, const Category &) = default;
};

/// COCO convention: top-left corner plus extent, in pixels.
struct BoundingBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  friend bool operator==(const BoundingBox &, const BoundingBox &) = default;
};

inline BoundingBox to_bbox(const Rect &r) { return BoundingBox{double(r.x), double(r.y), double(r.w), double(r.h)}; }

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  int category_id = 0;
  BoundingBox bbox;
  Source source = Source::kReal;
  friend bool operator==(const Annotation &, const Annotation &) = default;
};

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  /// Extension key: relative path of the image's binary object mask.
  std::string mask_file;
  friend bool operator==(const ImageRecord &, const ImageRecord &) = default;
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  std::vector<Category> categories;
  friend bool operator==(const Dataset &, const Dataset &) = default;

  const ImageRecord *find_image(std::int64_t id) const;
  const Category *find_category(int id) const;
  const Category *find_category(std::string_view name) const;
  std::int64_t max_image_id() const;
  std::int64_t max_annotation_id() const;
  /// Annotations grouped by image id, preserving file order.
  std::map<std::int64_t, std::vector<Annotation>> annotations_by_image() const;
};

/// {person, bicycle, car} with the FLIR ADAS / COCO ids.
std::vector<Category> default_categories();

struct DatasetOptions {
  /// Accept category names outside the default class set.
  bool allow_unknown_categories = false;
};

/// Checks every invariant: unique ids and file names, resolvable references,
/// positive extents, boxes inside their image. Throws ValidationError.
void validate(const Dataset &ds, const DatasetOptions &opts = {});

/// Parsing never returns a Dataset that fails validate().
Dataset parse_dataset_text(std::string_view text, const DatasetOptions &opts = {});
Dataset parse_dataset(const std::filesystem::path &path, const DatasetOptions &opts = {});

/// Deterministic serialization (fixed key order, two-space indent).
std::string dataset_to_text(const Dataset &ds);
void write_dataset(const Dataset &ds, const std::filesystem::path &path);

/// b's image and annotation ids are offset by a's maximum ids. Categories
/// must match exactly (CategoryMismatch).
Dataset merge_datasets(const Dataset &a, const Dataset &b);

struct DatasetStats {
  std::size_t images = 0;
  std::size_t annotations = 0;
  /// Keyed by category name; every category of the dataset appears.
  std::map<std::string, std::size_t> per_category;
  std::map<std::string, std::size_t> per_source;
};

DatasetStats dataset_stats(const Dataset &ds);

/// Detection file entries: scored predictions in dataset coordinates.
struct Detection {
  std::int64_t image_id = 0;
  int category_id = 0;
  BoundingBox bbox;
  double score = 0;
  friend bool operator==(const Detection &, const Detection &) = default;
};

std::vector<Detection> parse_detections_text(std::string_view text);
std::vector<Detection> parse_detections(const std::filesystem::path &path);
std::string detections_to_text(const std::vector<Detection> &dets);
void write_detections(const std::vector<Detection> &dets, const std::filesystem::path &path);

// Shared text helpers.
std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, std::string_view text);

}  // namespace thermaug
