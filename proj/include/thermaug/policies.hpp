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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "thermaug/annotations.hpp"
#include "thermaug/raster.hpp"

namespace thermaug {

enum class TransformKind {
  kTranslateX,
  kTranslateY,
  kEqualize,
  kAutoContrast,
  kSolarize,
  kBrightness,
  kCutout,
  kBoxTranslateX,
  kBoxTranslateY,
  kBoxCutout,
  kBoxZoom,
};

std::string_view transform_name(TransformKind kind);
std::optional<TransformKind> parse_transform(std::string_view name);
/// Box-level kinds act inside annotation boxes only.
bool is_box_level(TransformKind kind);

struct SubPolicyStep {
  TransformKind kind = TransformKind::kEqualize;
  double p = 0;  // firing probability, [0, 1]
  double m = 0;  // magnitude, [0, 10]
  friend bool operator==(const SubPolicyStep &, const SubPolicyStep &) = default;
};

using SubPolicy = std::vector<SubPolicyStep>;

struct Policy {
  std::string name;
  std::vector<SubPolicy> subpolicies;
  friend bool operator==(const Policy &, const Policy &) = default;
};

struct RandAugmentConfig {
  int n = 2;
  double m = 5;
  std::vector<TransformKind> pool;
  friend bool operator==(const RandAugmentConfig &, const RandAugmentConfig &) = default;
};

/// Magnitude to concrete parameter, one affine map per kind.
namespace magnitude {
/// Shift in pixels along an axis of length `extent`.
int translate_pixels(double m, int extent);
int solarize_threshold(double m);
double brightness_factor(double m);
/// Cutout side for an area whose short side is `min_side`.
int cutout_side(double m, int min_side);
double zoom_scale(double m);
}  // namespace magnitude

/// The one sub-policy BBAug policy v0 reduces to on thermal data:
/// TranslateX (p=0.6, m=4) then Equalize (p=0.8, m=10).
Policy policy_v0();

/// TranslateX, AutoContrast, Solarize, Equalize, Brightness and Cutout.
std::vector<TransformKind> default_randaugment_pool();

void validate(const Policy &policy);
void validate(const RandAugmentConfig &cfg);

struct Augmented {
  GrayImage image;
  std::vector<Annotation> annotations;
};

struct AugmentOptions {
  std::uint8_t fill = 0;
};

/// Applies one step unconditionally. `key` seeds its random choices (cutout
/// centres); geometric steps move and clip boxes, dropping any left with zero area.
Augmented apply_step(const GrayImage &img, const std::vector<Annotation> &anns, TransformKind kind, double m,
                     std::uint64_t key, const AugmentOptions &opts = {});

Augmented apply_subpolicy(const GrayImage &img, const std::vector<Annotation> &anns, const SubPolicy &sp,
                          std::uint64_t key, const AugmentOptions &opts = {});

/// Index of the sub-policy that apply_policy uses for `key`.
std::size_t select_subpolicy(const Policy &policy, std::uint64_t key);

Augmented apply_policy(const GrayImage &img, const std::vector<Annotation> &anns, const Policy &policy,
                       std::uint64_t key, const AugmentOptions &opts = {});

Augmented randaugment_apply(const GrayImage &img, const std::vector<Annotation> &anns, const RandAugmentConfig &cfg,
                            std::uint64_t key, const AugmentOptions &opts = {});

using AugmentProgram = std::variant<Policy, RandAugmentConfig>;

std::string describe(const Policy &policy);
std::string describe(const RandAugmentConfig &cfg);

/// {name, subpolicies: [[{kind, p, m}, ...], ...]}
Policy parse_policy_text(std::string_view text);
Policy load_policy(const std::filesystem::path &path);
std::string policy_to_text(const Policy &policy);

/// {n, m, pool}
RandAugmentConfig parse_randaugment_text(std::string_view text);
RandAugmentConfig load_randaugment(const std::filesystem::path &path);

/// Loads either kind of program, telling them apart by their keys.
AugmentProgram load_program(const std::filesystem::path &path);

/// floor(fraction * |images|), guarded against representation error.
std::size_t fraction_count(double fraction, std::size_t total);

struct AugmentDatasetResult {
  Dataset dataset;
  /// Ids (in `ds`) of the images that were augmented, in output order.
  std::vector<std::int64_t> source_ids;
};

/// Augments a seed-chosen floor(fraction * N) subset of `ds`. Copies get ids
/// after ds.max_image_id(); images go to <out_dir>/images and the dataset to
/// <out_dir>/dataset.json. Output is independent of `workers`.
AugmentDatasetResult augment_dataset(const Dataset &ds, const std::filesystem::path &image_root,
                                     const AugmentProgram &program, double fraction, std::uint64_t seed,
                                     const std::filesystem::path &out_dir, unsigned workers = 1,
                                     const AugmentOptions &opts = {});

}  // namespace thermaug
