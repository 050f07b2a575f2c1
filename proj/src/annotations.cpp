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
#include "thermaug/annotations.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "thermaug/error.hpp"

namespace thermaug {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::string_view kDefaultNames[] = {"person", "bicycle", "car"};

std::string box_text(const BoundingBox &b) {
  std::ostringstream s;
  s << "[" << b.x << "," << b.y << "," << b.w << "," << b.h << "]";
  return s.str();
}

[[noreturn]] void syntax_error(std::string_view text, const json::parse_error &e) {
  // byte is 1-based and points just past the offending character.
  const std::size_t pos = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < pos; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  raise(ErrorCode::kSyntaxError, "line " + std::to_string(line) + ", column " + std::to_string(col) + " (offset " +
                                     std::to_string(pos) + "): " + e.what());
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    syntax_error(text, e);
  }
}

const json &member(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object()) raise(ErrorCode::kSchemaError, where + " is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) raise(ErrorCode::kSchemaError, where + " is missing \"" + key + "\"");
  return *it;
}

std::int64_t get_int(const json &obj, const char *key, const std::string &where) {
  const json &v = member(obj, key, where);
  if (!v.is_number_integer()) raise(ErrorCode::kSchemaError, where + "." + key + " must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    raise(ErrorCode::kSchemaError, where + "." + key + " is out of range");
  return v.get<std::int64_t>();
}

int get_int32(const json &obj, const char *key, const std::string &where) {
  const std::int64_t v = get_int(obj, key, where);
  if (v < INT32_MIN || v > INT32_MAX) raise(ErrorCode::kSchemaError, where + "." + key + " is out of range");
  return static_cast<int>(v);
}

std::string get_string(const json &obj, const char *key, const std::string &where) {
  const json &v = member(obj, key, where);
  if (!v.is_string()) raise(ErrorCode::kSchemaError, where + "." + key + " must be a string");
  return v.get<std::string>();
}

BoundingBox get_bbox(const json &obj, const std::string &where) {
  const json &v = member(obj, "bbox", where);
  if (!v.is_array() || v.size() != 4) raise(ErrorCode::kSchemaError, where + ".bbox must be an array of 4 numbers");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) raise(ErrorCode::kSchemaError, where + ".bbox must be an array of 4 numbers");
    c[i] = v[i].get<double>();
    if (!std::isfinite(c[i])) raise(ErrorCode::kSchemaError, where + ".bbox has a non-finite value");
  }
  return BoundingBox{c[0], c[1], c[2], c[3]};
}

const json &get_array(const json &root, const char *key) {
  const json &v = member(root, key, "document");
  if (!v.is_array()) raise(ErrorCode::kSchemaError, std::string("\"") + key + "\" must be an array");
  return v;
}

ordered_json number(double v) {
  if (std::nearbyint(v) == v && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  return v;
}

ordered_json bbox_json(const BoundingBox &b) {
  return ordered_json::array({number(b.x), number(b.y), number(b.w), number(b.h)});
}

}  // namespace

std::string_view source_name(Source s) {
  switch (s) {
    case Source::kReal: return "real";
    case Source::kSynth: return "synth";
    case Source::kTranslated: return "translated";
  }
  return "real";
}

std::optional<Source> parse_source(std::string_view name) {
  if (name == "real") return Source::kReal;
  if (name == "synth") return Source::kSynth;
  if (name == "translated") return Source::kTranslated;
  return std::nullopt;
}

std::vector<Category> default_categories() { return {{1, "person"}, {2, "bicycle"}, {3, "car"}}; }

const ImageRecord *Dataset::find_image(std::int64_t id) const {
  auto it = std::find_if(images.begin(), images.end(), [id](const ImageRecord &r) { return r.id == id; });
  return it == images.end() ? nullptr : &*it;
}

const Category *Dataset::find_category(int id) const {
  auto it = std::find_if(categories.begin(), categories.end(), [id](const Category &c) { return c.id == id; });
  return it == categories.end() ? nullptr : &*it;
}

const Category *Dataset::find_category(std::string_view name) const {
  auto it =
      std::find_if(categories.begin(), categories.end(), [name](const Category &c) { return c.name == name; });
  return it == categories.end() ? nullptr : &*it;
}

std::int64_t Dataset::max_image_id() const {
  std::int64_t m = 0;
  for (const auto &r : images) m = std::max(m, r.id);
  return m;
}

std::int64_t Dataset::max_annotation_id() const {
  std::int64_t m = 0;
  for (const auto &a : annotations) m = std::max(m, a.id);
  return m;
}

std::map<std::int64_t, std::vector<Annotation>> Dataset::annotations_by_image() const {
  std::map<std::int64_t, std::vector<Annotation>> out;
  for (const auto &a : annotations) out[a.image_id].push_back(a);
  return out;
}

void validate(const Dataset &ds, const DatasetOptions &opts) {
  std::set<int> cat_ids;
  std::set<std::string> cat_names;
  for (const auto &c : ds.categories) {
    if (c.id <= 0) raise(ErrorCode::kValidationError, "category id " + std::to_string(c.id) + " must be positive");
    if (c.name.empty()) raise(ErrorCode::kValidationError, "category " + std::to_string(c.id) + " has an empty name");
    if (!cat_ids.insert(c.id).second)
      raise(ErrorCode::kValidationError, "duplicate category id " + std::to_string(c.id));
    if (!cat_names.insert(c.name).second) raise(ErrorCode::kValidationError, "duplicate category name " + c.name);
    if (!opts.allow_unknown_categories &&
        std::find(std::begin(kDefaultNames), std::end(kDefaultNames), c.name) == std::end(kDefaultNames))
      raise(ErrorCode::kValidationError,
            "unknown category \"" + c.name + "\" (use the allow-unknown-categories option to accept it)");
  }

  std::unordered_map<std::int64_t, const ImageRecord *> by_id;
  std::unordered_set<std::string> names;
  for (const auto &r : ds.images) {
    const std::string where = "image " + std::to_string(r.id);
    if (!by_id.emplace(r.id, &r).second) raise(ErrorCode::kValidationError, "duplicate image id " + std::to_string(r.id));
    if (r.width <= 0 || r.height <= 0) raise(ErrorCode::kValidationError, where + " has a non-positive extent");
    if (r.file_name.empty()) raise(ErrorCode::kValidationError, where + " has an empty file_name");
    if (!names.insert(r.file_name).second) raise(ErrorCode::kValidationError, "duplicate file_name " + r.file_name);
  }

  std::unordered_set<std::int64_t> ann_ids;
  for (const auto &a : ds.annotations) {
    const std::string where = "annotation " + std::to_string(a.id);
    if (!ann_ids.insert(a.id).second) raise(ErrorCode::kValidationError, "duplicate annotation id " + std::to_string(a.id));
    auto it = by_id.find(a.image_id);
    if (it == by_id.end())
      raise(ErrorCode::kValidationError, where + " references missing image " + std::to_string(a.image_id));
    if (!cat_ids.count(a.category_id))
      raise(ErrorCode::kValidationError, where + " references missing category " + std::to_string(a.category_id));
    const BoundingBox &b = a.bbox;
    if (!(b.w > 0 && b.h > 0)) raise(ErrorCode::kValidationError, where + " has a degenerate bbox " + box_text(b));
    const ImageRecord &img = *it->second;
    if (!(b.x >= 0 && b.y >= 0 && b.right() <= img.width && b.bottom() <= img.height))
      raise(ErrorCode::kValidationError, where + " bbox " + box_text(b) + " is out of bounds of " +
                                             std::to_string(img.width) + "x" + std::to_string(img.height) +
                                             " image " + std::to_string(img.id));
  }
}

Dataset parse_dataset_text(std::string_view text, const DatasetOptions &opts) {
  const json root = parse_json(text);
  if (!root.is_object()) raise(ErrorCode::kSchemaError, "document must be a JSON object");

  Dataset ds;
  for (const json &j : get_array(root, "images")) {
    const std::string where = "images[" + std::to_string(ds.images.size()) + "]";
    ImageRecord r;
    r.id = get_int(j, "id", where);
    r.file_name = get_string(j, "file_name", where);
    r.width = get_int32(j, "width", where);
    r.height = get_int32(j, "height", where);
    if (j.contains("mask_file")) r.mask_file = get_string(j, "mask_file", where);
    ds.images.push_back(std::move(r));
  }
  for (const json &j : get_array(root, "annotations")) {
    const std::string where = "annotations[" + std::to_string(ds.annotations.size()) + "]";
    Annotation a;
    a.id = get_int(j, "id", where);
    a.image_id = get_int(j, "image_id", where);
    a.category_id = get_int32(j, "category_id", where);
    a.bbox = get_bbox(j, where);
    if (j.contains("source")) {
      const auto src = parse_source(get_string(j, "source", where));
      if (!src) raise(ErrorCode::kSchemaError, where + ".source must be one of real, synth, translated");
      a.source = *src;
    }
    ds.annotations.push_back(a);
  }
  for (const json &j : get_array(root, "categories")) {
    const std::string where = "categories[" + std::to_string(ds.categories.size()) + "]";
    ds.categories.push_back(Category{get_int32(j, "id", where), get_string(j, "name", where)});
  }
  validate(ds, opts);
  return ds;
}

Dataset parse_dataset(const fs::path &path, const DatasetOptions &opts) {
  const std::string text = read_text_file(path);
  try {
    return parse_dataset_text(text, opts);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string dataset_to_text(const Dataset &ds) {
  validate(ds, DatasetOptions{.allow_unknown_categories = true});
  ordered_json root;
  root["images"] = ordered_json::array();
  for (const auto &r : ds.images) {
    ordered_json j;
    j["id"] = r.id;
    j["file_name"] = r.file_name;
    j["width"] = r.width;
    j["height"] = r.height;
    if (!r.mask_file.empty()) j["mask_file"] = r.mask_file;
    root["images"].push_back(std::move(j));
  }
  root["annotations"] = ordered_json::array();
  for (const auto &a : ds.annotations) {
    ordered_json j;
    j["id"] = a.id;
    j["image_id"] = a.image_id;
    j["category_id"] = a.category_id;
    j["bbox"] = bbox_json(a.bbox);
    j["area"] = number(a.bbox.area());
    j["iscrowd"] = 0;
    if (a.source != Source::kReal) j["source"] = source_name(a.source);
    root["annotations"].push_back(std::move(j));
  }
  root["categories"] = ordered_json::array();
  for (const auto &c : ds.categories) root["categories"].push_back(ordered_json{{"id", c.id}, {"name", c.name}});
  return root.dump(2) + "\n";
}

void write_dataset(const Dataset &ds, const fs::path &path) { write_text_file(path, dataset_to_text(ds)); }

Dataset merge_datasets(const Dataset &a, const Dataset &b) {
  const bool a_blank = a.images.empty() && a.annotations.empty() && a.categories.empty();
  auto sorted = [](std::vector<Category> c) {
    std::sort(c.begin(), c.end(), [](const Category &x, const Category &y) { return x.id < y.id; });
    return c;
  };
  if (!a_blank && sorted(a.categories) != sorted(b.categories))
    raise(ErrorCode::kCategoryMismatch, "datasets have different category tables");

  Dataset out = a;
  if (a_blank) out.categories = b.categories;
  const std::int64_t image_offset = a.max_image_id();
  const std::int64_t ann_offset = a.max_annotation_id();
  out.images.reserve(a.images.size() + b.images.size());
  for (ImageRecord r : b.images) {
    r.id += image_offset;
    out.images.push_back(std::move(r));
  }
  out.annotations.reserve(a.annotations.size() + b.annotations.size());
  for (Annotation ann : b.annotations) {
    ann.id += ann_offset;
    ann.image_id += image_offset;
    out.annotations.push_back(ann);
  }
  validate(out, DatasetOptions{.allow_unknown_categories = true});
  return out;
}

DatasetStats dataset_stats(const Dataset &ds) {
  DatasetStats s;
  s.images = ds.images.size();
  s.annotations = ds.annotations.size();
  for (const auto &c : ds.categories) s.per_category[c.name] = 0;
  for (Source src : {Source::kReal, Source::kSynth, Source::kTranslated}) s.per_source[std::string(source_name(src))] = 0;
  for (const auto &a : ds.annotations) {
    const Category *c = ds.find_category(a.category_id);
    ++s.per_category[c ? c->name : "category_" + std::to_string(a.category_id)];
    ++s.per_source[std::string(source_name(a.source))];
  }
  return s;
}

std::vector<Detection> parse_detections_text(std::string_view text) {
  const json root = parse_json(text);
  if (!root.is_array()) raise(ErrorCode::kSchemaError, "detection file must be a JSON array");
  std::vector<Detection> out;
  out.reserve(root.size());
  for (const json &j : root) {
    const std::string where = "detections[" + std::to_string(out.size()) + "]";
    Detection d;
    d.image_id = get_int(j, "image_id", where);
    d.category_id = get_int32(j, "category_id", where);
    d.bbox = get_bbox(j, where);
    const json &s = member(j, "score", where);
    if (!s.is_number()) raise(ErrorCode::kSchemaError, where + ".score must be a number");
    d.score = s.get<double>();
    if (!(d.score >= 0.0 && d.score <= 1.0)) raise(ErrorCode::kValidationError, where + ".score outside [0,1]");
    if (!(d.bbox.w > 0 && d.bbox.h > 0))
      raise(ErrorCode::kValidationError, where + " has a degenerate bbox " + box_text(d.bbox));
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> parse_detections(const fs::path &path) {
  const std::string text = read_text_file(path);
  try {
    return parse_detections_text(text);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string detections_to_text(const std::vector<Detection> &dets) {
  ordered_json root = ordered_json::array();
  for (const auto &d : dets) {
    ordered_json j;
    j["image_id"] = d.image_id;
    j["category_id"] = d.category_id;
    j["bbox"] = bbox_json(d.bbox);
    j["score"] = d.score;
    root.push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

void write_detections(const std::vector<Detection> &dets, const fs::path &path) {
  write_text_file(path, detections_to_text(dets));
}

std::string read_text_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) raise(ErrorCode::kIoError, "read failed: " + path.string());
  return s.str();
}

void write_text_file(const fs::path &path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) raise(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace thermaug
