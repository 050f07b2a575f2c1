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

#include <span>
#include <string>
#include <vector>

#include "thermaug/annotations.hpp"

namespace thermaug {

enum class Interpolation { kAllPoint, kElevenPoint };

struct EvalConfig {
  double iou_threshold = 0.5;
  Interpolation interpolation = Interpolation::kAllPoint;
};

double iou(const BoundingBox &a, const BoundingBox &b);

/// Per-detection outcome in the order the detections were given.
enum class MatchLabel { kFalsePositive, kTruePositive };

/// Greedy matching within one (image, category) group: detections in
/// descending score order (stable on ties) take the unmatched ground truth of
/// highest IoU at or above the threshold; equal IoUs go to the earlier box.
std::vector<MatchLabel> match_detections(std::span<const BoundingBox> gts, std::span<const Detection> dets,
                                         const EvalConfig &cfg);

/// Area under the precision envelope of labels sorted by descending score.
/// total_gt == 0 gives 1 for no detections and 0 otherwise.
double average_precision(std::span<const MatchLabel> ranked, std::size_t total_gt,
                         Interpolation interpolation = Interpolation::kAllPoint);

struct CategoryResult {
  int category_id = 0;
  std::string name;
  double ap = 0;
  std::size_t gt = 0;
  std::size_t detections = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t missed = 0;
  /// Categories without ground truth are left out of the mAP.
  bool included = true;
};

struct APReport {
  std::vector<CategoryResult> categories;
  double map = 0;
  EvalConfig config;
};

/// Throws DanglingReference for detections naming unknown images/categories.
APReport evaluate(const Dataset &gt, std::span<const Detection> dets, const EvalConfig &cfg = {});

/// Person | Bicycle | Car | ... | mAP, percentages with one decimal.
std::string report_table(const APReport &report, const std::string &label = "");
std::string report_json(const APReport &report);

}  // namespace thermaug
