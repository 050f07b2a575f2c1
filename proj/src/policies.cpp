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
#include "thermaug/policies.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "thermaug/error.hpp"
#include "thermaug/image_io.hpp"
#include "thermaug/parallel.hpp"
#include "thermaug/random.hpp"

namespace thermaug {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct KindName {
  TransformKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {TransformKind::kTranslateX, "TranslateX"},       {TransformKind::kTranslateY, "TranslateY"},
    {TransformKind::kEqualize, "Equalize"},           {TransformKind::kAutoContrast, "AutoContrast"},
    {TransformKind::kSolarize, "Solarize"},           {TransformKind::kBrightness, "Brightness"},
    {TransformKind::kCutout, "Cutout"},               {TransformKind::kBoxTranslateX, "BoxTranslateX"},
    {TransformKind::kBoxTranslateY, "BoxTranslateY"}, {TransformKind::kBoxCutout, "BoxCutout"},
    {TransformKind::kBoxZoom, "BoxZoom"},
};

// Key tags; each random decision draws from its own derived stream.
constexpr std::uint64_t kFireTag = 1;
constexpr std::uint64_t kStepTag = 2;
constexpr std::uint64_t kSelectTag = 3;
constexpr std::uint64_t kRandPickTag = 5;
constexpr std::uint64_t kRandStepTag = 6;
constexpr std::uint64_t kSubsetTag = 7;
constexpr std::uint64_t kImageTag = 8;

/// Pixel rectangle covering a box, clipped to the frame.
Rect pixel_rect(const BoundingBox &b, const Rect &frame) {
  const int x0 = static_cast<int>(std::floor(b.x));
  const int y0 = static_cast<int>(std::floor(b.y));
  const int x1 = static_cast<int>(std::ceil(b.right()));
  const int y1 = static_cast<int>(std::ceil(b.bottom()));
  return intersect(Rect{x0, y0, x1 - x0, y1 - y0}, frame);
}

/// Clips to [0, W] x [0, H]; false when nothing is left.
bool clip_box(BoundingBox &b, int w, int h) {
  const double x0 = std::max(0.0, b.x);
  const double y0 = std::max(0.0, b.y);
  const double x1 = std::min<double>(w, b.right());
  const double y1 = std::min<double>(h, b.bottom());
  if (!(x1 > x0 && y1 > y0)) return false;
  b = BoundingBox{x0, y0, x1 - x0, y1 - y0};
  return true;
}

std::vector<Annotation> shift_boxes(const std::vector<Annotation> &anns, double dx, double dy, int w, int h) {
  std::vector<Annotation> out;
  out.reserve(anns.size());
  for (Annotation a : anns) {
    a.bbox.x += dx;
    a.bbox.y += dy;
    if (clip_box(a.bbox, w, h)) out.push_back(a);
  }
  return out;
}

GrayImage zoom_box(const GrayImage &src, GrayImage dst, const Rect &from, const Rect &to, double cx, double cy,
                   double scale) {
  for (int y = to.y; y < to.bottom(); ++y) {
    const int sy = std::clamp(static_cast<int>(std::floor(cy + (y + 0.5 - cy) / scale)), from.y, from.bottom() - 1);
    for (int x = to.x; x < to.right(); ++x) {
      const int sx =
          std::clamp(static_cast<int>(std::floor(cx + (x + 0.5 - cx) / scale)), from.x, from.right() - 1);
      dst(y, x) = src(sy, sx);
    }
  }
  return dst;
}

std::string fmt_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void check_step(const SubPolicyStep &s) {
  if (!(s.p >= 0.0 && s.p <= 1.0))
    raise(ErrorCode::kValidationError, std::string(transform_name(s.kind)) + ": p outside [0,1]");
  if (!(s.m >= 0.0 && s.m <= 10.0))
    raise(ErrorCode::kValidationError, std::string(transform_name(s.kind)) + ": m outside [0,10]");
}

json parse_json(std::string_view text, const char *what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    raise(ErrorCode::kSyntaxError, std::string(what) + ": " + e.what());
  }
}

TransformKind kind_from_json(const json &v) {
  if (!v.is_string()) raise(ErrorCode::kSchemaError, "transform kind must be a string");
  const auto k = parse_transform(v.get<std::string>());
  if (!k) raise(ErrorCode::kSchemaError, "unknown transform kind \"" + v.get<std::string>() + "\"");
  return *k;
}

double number_field(const json &obj, const char *key) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number())
    raise(ErrorCode::kSchemaError, std::string("missing numeric field \"") + key + "\"");
  return obj[key].get<double>();
}

}  // namespace

std::string_view transform_name(TransformKind kind) {
  for (const auto &kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "?";
}

std::optional<TransformKind> parse_transform(std::string_view name) {
  for (const auto &kn : kKindNames)
    if (kn.name == name) return kn.kind;
  return std::nullopt;
}

bool is_box_level(TransformKind kind) {
  return kind == TransformKind::kBoxTranslateX || kind == TransformKind::kBoxTranslateY ||
         kind == TransformKind::kBoxCutout || kind == TransformKind::kBoxZoom;
}

namespace magnitude {
int translate_pixels(double m, int extent) { return static_cast<int>(std::lround(m / 10.0 * 0.3 * extent)); }
int solarize_threshold(double m) { return 255 - static_cast<int>(std::lround(m / 10.0 * 255.0)); }
double brightness_factor(double m) { return 0.4 + m / 10.0 * 1.2; }
int cutout_side(double m, int min_side) { return static_cast<int>(std::lround(m / 10.0 * 0.25 * min_side)); }
double zoom_scale(double m) { return 1.0 + m / 10.0 * 0.5; }
}  // namespace magnitude

Policy policy_v0() {
  return Policy{"v0", {{{TransformKind::kTranslateX, 0.6, 4}, {TransformKind::kEqualize, 0.8, 10}}}};
}

std::vector<TransformKind> default_randaugment_pool() {
  return {TransformKind::kTranslateX, TransformKind::kAutoContrast, TransformKind::kSolarize,
          TransformKind::kEqualize,   TransformKind::kBrightness,   TransformKind::kCutout};
}

void validate(const Policy &policy) {
  if (policy.subpolicies.empty()) raise(ErrorCode::kValidationError, "policy " + policy.name + " has no sub-policies");
  for (const auto &sp : policy.subpolicies) {
    if (sp.empty()) raise(ErrorCode::kValidationError, "policy " + policy.name + " has an empty sub-policy");
    for (const auto &step : sp) check_step(step);
  }
}

void validate(const RandAugmentConfig &cfg) {
  if (cfg.n < 0) raise(ErrorCode::kValidationError, "RandAugment n must be >= 0");
  if (!(cfg.m >= 0.0 && cfg.m <= 10.0)) raise(ErrorCode::kValidationError, "RandAugment m outside [0,10]");
  if (cfg.n > 0 && cfg.pool.empty()) raise(ErrorCode::kValidationError, "RandAugment pool is empty");
  for (TransformKind k : cfg.pool)
    if (is_box_level(k))
      raise(ErrorCode::kValidationError,
            "RandAugment pool accepts image-level transforms only, got " + std::string(transform_name(k)));
}

Augmented apply_step(const GrayImage &img, const std::vector<Annotation> &anns, TransformKind kind, double m,
                     std::uint64_t key, const AugmentOptions &opts) {
  const int w = width(img);
  const int h = height(img);
  const Rect frame = extent_of(img);
  Rng rng(key);
  switch (kind) {
    case TransformKind::kTranslateX: {
      const int dx = magnitude::translate_pixels(m, w);
      return {translate(img, dx, 0, opts.fill), shift_boxes(anns, dx, 0, w, h)};
    }
    case TransformKind::kTranslateY: {
      const int dy = magnitude::translate_pixels(m, h);
      return {translate(img, 0, dy, opts.fill), shift_boxes(anns, 0, dy, w, h)};
    }
    case TransformKind::kEqualize: return {equalize(img), anns};
    case TransformKind::kAutoContrast: return {autocontrast(img), anns};
    case TransformKind::kSolarize: return {solarize(img, magnitude::solarize_threshold(m)), anns};
    case TransformKind::kBrightness: return {brightness(img, magnitude::brightness_factor(m)), anns};
    case TransformKind::kCutout: {
      const int side = magnitude::cutout_side(m, std::min(w, h));
      if (side <= 0 || img.size() == 0) return {img, anns};
      const int cx = static_cast<int>(rng.between(0, w - 1));
      const int cy = static_cast<int>(rng.between(0, h - 1));
      return {cutout(img, cx, cy, side, opts.fill), anns};
    }
    case TransformKind::kBoxTranslateX:
    case TransformKind::kBoxTranslateY: {
      GrayImage out = img;
      for (const auto &a : anns) {
        const Rect r = pixel_rect(a.bbox, frame);
        if (r.empty()) continue;
        const bool horizontal = kind == TransformKind::kBoxTranslateX;
        const int d = magnitude::translate_pixels(m, horizontal ? r.w : r.h);
        out = translate_region(out, r, horizontal ? d : 0, horizontal ? 0 : d, opts.fill);
      }
      return {std::move(out), anns};
    }
    case TransformKind::kBoxCutout: {
      GrayImage out = img;
      for (const auto &a : anns) {
        const Rect r = pixel_rect(a.bbox, frame);
        if (r.empty()) continue;
        const int side = magnitude::cutout_side(m, std::min(r.w, r.h));
        if (side <= 0) continue;
        const int cx = static_cast<int>(rng.between(r.x, r.right() - 1));
        const int cy = static_cast<int>(rng.between(r.y, r.bottom() - 1));
        const Rect c = intersect(cutout_rect(cx, cy, side), r);
        if (!c.empty()) out.block(c.y, c.x, c.h, c.w).setConstant(opts.fill);
      }
      return {std::move(out), anns};
    }
    case TransformKind::kBoxZoom: {
      const double s = magnitude::zoom_scale(m);
      GrayImage out = img;
      std::vector<Annotation> boxes;
      boxes.reserve(anns.size());
      for (Annotation a : anns) {
        const Rect from = pixel_rect(a.bbox, frame);
        const double cx = a.bbox.x + a.bbox.w / 2.0;
        const double cy = a.bbox.y + a.bbox.h / 2.0;
        BoundingBox zoomed{cx - a.bbox.w * s / 2.0, cy - a.bbox.h * s / 2.0, a.bbox.w * s, a.bbox.h * s};
        if (!clip_box(zoomed, w, h)) continue;
        if (!from.empty()) {
          const GrayImage snapshot = out;
          out = zoom_box(snapshot, std::move(out), from, pixel_rect(zoomed, frame), cx, cy, s);
        }
        a.bbox = zoomed;
        boxes.push_back(a);
      }
      return {std::move(out), std::move(boxes)};
    }
  }
  return {img, anns};
}

Augmented apply_subpolicy(const GrayImage &img, const std::vector<Annotation> &anns, const SubPolicy &sp,
                          std::uint64_t key, const AugmentOptions &opts) {
  Augmented cur{img, anns};
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const SubPolicyStep &step = sp[i];
    if (!(Rng(derive_key(key, {kFireTag, i})).uniform() < step.p)) continue;
    cur = apply_step(cur.image, cur.annotations, step.kind, step.m, derive_key(key, {kStepTag, i}), opts);
  }
  return cur;
}

std::size_t select_subpolicy(const Policy &policy, std::uint64_t key) {
  if (policy.subpolicies.empty()) raise(ErrorCode::kValidationError, "policy " + policy.name + " has no sub-policies");
  return static_cast<std::size_t>(Rng(derive_key(key, {kSelectTag})).below(policy.subpolicies.size()));
}

Augmented apply_policy(const GrayImage &img, const std::vector<Annotation> &anns, const Policy &policy,
                       std::uint64_t key, const AugmentOptions &opts) {
  return apply_subpolicy(img, anns, policy.subpolicies[select_subpolicy(policy, key)], key, opts);
}

Augmented randaugment_apply(const GrayImage &img, const std::vector<Annotation> &anns, const RandAugmentConfig &cfg,
                            std::uint64_t key, const AugmentOptions &opts) {
  validate(cfg);
  Augmented cur{img, anns};
  for (int j = 0; j < cfg.n; ++j) {
    const auto u = static_cast<std::uint64_t>(j);
    const TransformKind kind = cfg.pool[Rng(derive_key(key, {kRandPickTag, u})).below(cfg.pool.size())];
    cur = apply_step(cur.image, cur.annotations, kind, cfg.m, derive_key(key, {kRandStepTag, u}), opts);
  }
  return cur;
}

std::string describe(const Policy &policy) {
  std::string s = "policy " + policy.name + ":";
  for (std::size_t i = 0; i < policy.subpolicies.size(); ++i) {
    s += i == 0 ? " [" : " | [";
    for (std::size_t k = 0; k < policy.subpolicies[i].size(); ++k) {
      const auto &step = policy.subpolicies[i][k];
      if (k) s += ", ";
      s += std::string(transform_name(step.kind)) + " " + fmt_number(step.p) + "/" + fmt_number(step.m);
    }
    s += "]";
  }
  return s;
}

std::string describe(const RandAugmentConfig &cfg) {
  std::string s = "randaugment: n=" + std::to_string(cfg.n) + " m=" + fmt_number(cfg.m) + " pool=[";
  for (std::size_t i = 0; i < cfg.pool.size(); ++i) s += (i ? ", " : "") + std::string(transform_name(cfg.pool[i]));
  return s + "]";
}

Policy parse_policy_text(std::string_view text) {
  const json root = parse_json(text, "policy");
  try {
    if (!root.is_object() || !root.contains("subpolicies") || !root["subpolicies"].is_array())
      raise(ErrorCode::kSchemaError, "policy needs a \"subpolicies\" array");
    Policy p;
    p.name = root.value("name", std::string("unnamed"));
    for (const json &sj : root["subpolicies"]) {
      if (!sj.is_array()) raise(ErrorCode::kSchemaError, "each sub-policy must be an array of steps");
      SubPolicy sp;
      for (const json &st : sj) {
        if (!st.is_object() || !st.contains("kind")) raise(ErrorCode::kSchemaError, "step needs \"kind\"");
        sp.push_back(SubPolicyStep{kind_from_json(st["kind"]), number_field(st, "p"), number_field(st, "m")});
      }
      p.subpolicies.push_back(std::move(sp));
    }
    validate(p);
    return p;
  } catch (const json::exception &e) {
    raise(ErrorCode::kSchemaError, std::string("policy: ") + e.what());
  }
}

Policy load_policy(const fs::path &path) {
  try {
    return parse_policy_text(read_text_file(path));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string policy_to_text(const Policy &policy) {
  ordered_json root;
  root["name"] = policy.name;
  root["subpolicies"] = ordered_json::array();
  for (const auto &sp : policy.subpolicies) {
    ordered_json steps = ordered_json::array();
    for (const auto &s : sp) steps.push_back(ordered_json{{"kind", transform_name(s.kind)}, {"p", s.p}, {"m", s.m}});
    root["subpolicies"].push_back(std::move(steps));
  }
  return root.dump(2) + "\n";
}

RandAugmentConfig parse_randaugment_text(std::string_view text) {
  const json root = parse_json(text, "randaugment");
  try {
    if (!root.is_object()) raise(ErrorCode::kSchemaError, "RandAugment config must be an object");
    RandAugmentConfig cfg;
    if (!root.contains("n") || !root["n"].is_number_integer())
      raise(ErrorCode::kSchemaError, "RandAugment config needs integer \"n\"");
    cfg.n = root["n"].get<int>();
    cfg.m = number_field(root, "m");
    if (root.contains("pool")) {
      if (!root["pool"].is_array()) raise(ErrorCode::kSchemaError, "\"pool\" must be an array");
      for (const json &k : root["pool"]) cfg.pool.push_back(kind_from_json(k));
    } else {
      cfg.pool = default_randaugment_pool();
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception &e) {
    raise(ErrorCode::kSchemaError, std::string("randaugment: ") + e.what());
  }
}

RandAugmentConfig load_randaugment(const fs::path &path) {
  try {
    return parse_randaugment_text(read_text_file(path));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

AugmentProgram load_program(const fs::path &path) {
  const std::string text = read_text_file(path);
  const json root = parse_json(text, path.string().c_str());
  if (root.is_object() && root.contains("subpolicies")) return load_policy(path);
  return load_randaugment(path);
}

std::size_t fraction_count(double fraction, std::size_t total) {
  const double raw = fraction * static_cast<double>(total);
  return static_cast<std::size_t>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
}

AugmentDatasetResult augment_dataset(const Dataset &ds, const fs::path &image_root, const AugmentProgram &program,
                                     double fraction, std::uint64_t seed, const fs::path &out_dir, unsigned workers,
                                     const AugmentOptions &opts) {
  if (!(fraction > 0.0 && fraction <= 1.0)) raise(ErrorCode::kInvalidArgument, "fraction must lie in (0, 1]");
  std::visit([](const auto &p) { validate(p); }, program);

  const std::size_t count = fraction_count(fraction, ds.images.size());
  std::vector<std::size_t> chosen = permutation(ds.images.size(), derive_key(seed, {kSubsetTag}));
  chosen.resize(count);
  std::sort(chosen.begin(), chosen.end());

  const auto by_image = ds.annotations_by_image();
  const std::int64_t id_base = ds.max_image_id();

  struct Produced {
    ImageRecord record;
    std::vector<Annotation> annotations;
  };
  std::vector<Produced> produced(count);
  parallel_for(count, workers, [&](std::size_t k) {
    const ImageRecord &src = ds.images[chosen[k]];
    const GrayImage img = load_image(image_root / src.file_name);
    if (width(img) != src.width || height(img) != src.height)
      raise(ErrorCode::kValidationError, src.file_name + " does not match its recorded extent");
    auto it = by_image.find(src.id);
    const std::vector<Annotation> anns = it == by_image.end() ? std::vector<Annotation>{} : it->second;
    const std::uint64_t key = derive_key(seed, {kImageTag, static_cast<std::uint64_t>(src.id)});
    Augmented aug = std::visit(
        [&](const auto &p) -> Augmented {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, Policy>)
            return apply_policy(img, anns, p, key, opts);
          else
            return randaugment_apply(img, anns, p, key, opts);
        },
        program);

    char name[48];
    std::snprintf(name, sizeof(name), "images/aug_%06lld.png", static_cast<long long>(src.id));
    Produced &p = produced[k];
    p.record = ImageRecord{id_base + static_cast<std::int64_t>(k) + 1, name, src.width, src.height, {}};
    save_image(aug.image, out_dir / p.record.file_name);
    p.annotations = std::move(aug.annotations);
  });

  AugmentDatasetResult result;
  result.dataset.categories = ds.categories;
  std::int64_t next_ann = ds.max_annotation_id() + 1;
  for (std::size_t k = 0; k < count; ++k) {
    for (Annotation a : produced[k].annotations) {
      a.id = next_ann++;
      a.image_id = produced[k].record.id;
      a.source = Source::kSynth;
      result.dataset.annotations.push_back(a);
    }
    result.dataset.images.push_back(std::move(produced[k].record));
    result.source_ids.push_back(ds.images[chosen[k]].id);
  }
  write_dataset(result.dataset, out_dir / "dataset.json");
  return result;
}

}  // namespace thermaug
