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
#include "thermaug/evaluator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <numeric>

#include "thermaug/error.hpp"

namespace thermaug {
namespace {

std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

std::string title_case(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
  return buf;
}

}  // namespace

double iou(const BoundingBox &a, const BoundingBox &b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::vector<MatchLabel> match_detections(std::span<const BoundingBox> gts, std::span<const Detection> dets,
                                         const EvalConfig &cfg) {
  std::vector<MatchLabel> labels(dets.size(), MatchLabel::kFalsePositive);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : score_order(dets)) {
    double best = -1;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double o = iou(dets[d].bbox, gts[g]);
      if (o >= cfg.iou_threshold && o > best) {
        best = o;
        best_gt = g;
      }
    }
    if (best_gt < gts.size()) {
      taken[best_gt] = true;
      labels[d] = MatchLabel::kTruePositive;
    }
  }
  return labels;
}

double average_precision(std::span<const MatchLabel> ranked, std::size_t total_gt, Interpolation interpolation) {
  if (total_gt == 0) return ranked.empty() ? 1.0 : 0.0;
  const std::size_t n = ranked.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked[i] == MatchLabel::kTruePositive) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  // Envelope: max precision at any rank at or beyond i.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  if (interpolation == Interpolation::kElevenPoint) {
    double sum = 0;
    std::size_t i = 0;
    for (int k = 0; k <= 10; ++k) {
      const double r = k / 10.0;
      while (i < n && recall[i] < r - 1e-12) ++i;
      if (i < n) sum += precision[i];
    }
    return sum / 11.0;
  }
  double ap = 0;
  double prev_recall = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

APReport evaluate(const Dataset &gt, std::span<const Detection> dets, const EvalConfig &cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0))
    raise(ErrorCode::kInvalidArgument, "IoU threshold must lie in (0, 1]");
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!gt.find_image(dets[i].image_id))
      raise(ErrorCode::kDanglingReference,
            "detection " + std::to_string(i) + " references unknown image " + std::to_string(dets[i].image_id));
    if (!gt.find_category(dets[i].category_id))
      raise(ErrorCode::kDanglingReference, "detection " + std::to_string(i) + " references unknown category " +
                                               std::to_string(dets[i].category_id));
  }

  APReport report;
  report.config = cfg;
  std::vector<Category> cats = gt.categories;
  std::sort(cats.begin(), cats.end(), [](const Category &a, const Category &b) { return a.id < b.id; });
  double sum = 0;
  std::size_t included = 0;
  for (const Category &cat : cats) {
    // Category slice, kept in input order so stable tie-breaking carries through.
    std::vector<Detection> cat_dets;
    for (const auto &d : dets)
      if (d.category_id == cat.id) cat_dets.push_back(d);
    std::map<std::int64_t, std::vector<BoundingBox>> gt_boxes;
    std::size_t total_gt = 0;
    for (const auto &a : gt.annotations)
      if (a.category_id == cat.id) {
        gt_boxes[a.image_id].push_back(a.bbox);
        ++total_gt;
      }
    std::map<std::int64_t, std::vector<std::size_t>> det_index;
    for (std::size_t i = 0; i < cat_dets.size(); ++i) det_index[cat_dets[i].image_id].push_back(i);

    std::vector<MatchLabel> labels(cat_dets.size(), MatchLabel::kFalsePositive);
    for (const auto &[image_id, idx] : det_index) {
      std::vector<Detection> group;
      for (std::size_t i : idx) group.push_back(cat_dets[i]);
      const auto it = gt_boxes.find(image_id);
      const std::vector<BoundingBox> none;
      const auto group_labels = match_detections(it == gt_boxes.end() ? none : it->second, group, cfg);
      for (std::size_t k = 0; k < idx.size(); ++k) labels[idx[k]] = group_labels[k];
    }
    std::vector<MatchLabel> ranked;
    for (std::size_t i : score_order(cat_dets)) ranked.push_back(labels[i]);

    CategoryResult r;
    r.category_id = cat.id;
    r.name = cat.name;
    r.gt = total_gt;
    r.detections = cat_dets.size();
    r.tp = static_cast<std::size_t>(std::count(ranked.begin(), ranked.end(), MatchLabel::kTruePositive));
    r.fp = r.detections - r.tp;
    r.missed = total_gt - r.tp;
    r.ap = average_precision(ranked, total_gt, cfg.interpolation);
    r.included = total_gt > 0;
    if (r.included) {
      sum += r.ap;
      ++included;
    }
    report.categories.push_back(r);
  }
  report.map = included ? sum / static_cast<double>(included) : 0.0;
  return report;
}

std::string report_table(const APReport &report, const std::string &label) {
  // Fixed column order first, then any extra classes by id.
  std::vector<const CategoryResult *> cols;
  for (std::string_view name : {"person", "bicycle", "car"})
    for (const auto &c : report.categories)
      if (c.name == name) cols.push_back(&c);
  for (const auto &c : report.categories)
    if (std::find(cols.begin(), cols.end(), &c) == cols.end()) cols.push_back(&c);

  std::vector<std::string> head, row;
  if (!label.empty()) {
    head.push_back("Technique");
    row.push_back(label);
  }
  for (const auto *c : cols) {
    head.push_back(title_case(c->name));
    row.push_back(c->included ? pct(c->ap) : "-");
  }
  head.push_back("mAP");
  row.push_back(pct(report.map));

  std::string top, bottom;
  for (std::size_t i = 0; i < head.size(); ++i) {
    const std::size_t w = std::max(head[i].size(), row[i].size());
    auto pad = [w, left = !label.empty() && i == 0](const std::string &s) {
      return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
    };
    top += (i ? " | " : "") + pad(head[i]);
    bottom += (i ? " | " : "") + pad(row[i]);
  }
  return top + "\n" + bottom + "\n";
}

std::string report_json(const APReport &report) {
  nlohmann::ordered_json root;
  root["iou_threshold"] = report.config.iou_threshold;
  root["interpolation"] = report.config.interpolation == Interpolation::kAllPoint ? "all-point" : "eleven-point";
  root["categories"] = nlohmann::ordered_json::array();
  for (const auto &c : report.categories)
    root["categories"].push_back(nlohmann::ordered_json{{"id", c.category_id},
                                                        {"name", c.name},
                                                        {"ap", c.ap},
                                                        {"gt", c.gt},
                                                        {"detections", c.detections},
                                                        {"tp", c.tp},
                                                        {"fp", c.fp},
                                                        {"missed", c.missed},
                                                        {"included_in_map", c.included}});
  root["map"] = report.map;
  return root.dump(2) + "\n";
}

}  // namespace thermaug
