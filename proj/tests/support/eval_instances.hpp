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

#include <vector>

#include "thermaug/annotations.hpp"
#include "thermaug/random.hpp"

namespace thermaug::testing {

struct EvalInstance {
  Dataset gt;
  std::vector<Detection> dets;
};

/// Small scoring problem with boxes on a coarse grid, so overlaps, IoU ties
/// and score ties are common.
inline EvalInstance random_eval_instance(Rng &rng, int max_images = 5, int max_dets = 6, int max_gts = 4) {
  EvalInstance inst;
  inst.gt.categories = default_categories();
  const int images = 1 + static_cast<int>(rng.below(max_images));
  for (int i = 1; i <= images; ++i) inst.gt.images.push_back(ImageRecord{i, "f" + std::to_string(i), 40, 40, {}});
  auto box = [&] {
    const double w = 2.0 * (1 + static_cast<double>(rng.below(5)));
    const double h = 2.0 * (1 + static_cast<double>(rng.below(5)));
    const double x = 2.0 * static_cast<double>(rng.below(6));
    const double y = 2.0 * static_cast<double>(rng.below(6));
    return BoundingBox{x, y, w, h};
  };
  const int gts = static_cast<int>(rng.below(max_gts + 1));
  for (int k = 0; k < gts; ++k)
    inst.gt.annotations.push_back(Annotation{k + 1, 1 + static_cast<std::int64_t>(rng.below(images)),
                                             1 + static_cast<int>(rng.below(3)), box(), Source::kReal});
  const int dets = static_cast<int>(rng.below(max_dets + 1));
  for (int k = 0; k < dets; ++k) {
    Detection d{1 + static_cast<std::int64_t>(rng.below(images)), 1 + static_cast<int>(rng.below(3)), box(),
                static_cast<double>(rng.below(5)) / 4.0};
    // Often sit exactly on a ground-truth box of the same image.
    if (!inst.gt.annotations.empty() && rng.below(2)) {
      const Annotation &a = inst.gt.annotations[rng.below(inst.gt.annotations.size())];
      d.image_id = a.image_id;
      d.category_id = a.category_id;
      d.bbox = a.bbox;
      if (rng.below(2)) d.bbox.x += 2;
    }
    inst.dets.push_back(d);
  }
  return inst;
}

/// One detection per ground-truth box, exact and fully confident.
inline std::vector<Detection> perfect_detections(const Dataset &gt) {
  std::vector<Detection> dets;
  for (const auto &a : gt.annotations) dets.push_back(Detection{a.image_id, a.category_id, a.bbox, 1.0});
  return dets;
}

}  // namespace thermaug::testing
