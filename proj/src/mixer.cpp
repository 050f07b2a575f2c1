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
#include "thermaug/mixer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "thermaug/error.hpp"
#include "thermaug/random.hpp"

namespace thermaug {

std::size_t mix_target(double percentage, std::size_t real_images) {
  if (!(percentage >= 0.0 && percentage <= 1.0)) raise(ErrorCode::kInvalidArgument, "percentage must lie in [0,1]");
  const double raw = percentage * static_cast<double>(real_images);
  return static_cast<std::size_t>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
}

std::vector<std::size_t> apportion(std::size_t target, const std::vector<double> &weights,
                                   const std::vector<std::size_t> &sizes) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out(n, 0);
  if (target == 0) return out;
  std::size_t available = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      raise(ErrorCode::kInvalidArgument, "pool weights must be finite and >= 0");
    if (weights[i] > 0) available += sizes[i];
  }
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; }))
    raise(ErrorCode::kInvalidArgument, "all pool weights are zero");
  if (available < target)
    raise(ErrorCode::kPoolExhausted, "need " + std::to_string(target) + " images but the pools hold only " +
                                         std::to_string(available));

  std::size_t remaining = target;
  while (remaining > 0) {
    std::vector<std::size_t> open;
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (weights[i] > 0 && out[i] < sizes[i]) {
        open.push_back(i);
        total += weights[i];
      }
    std::vector<std::size_t> share(n, 0);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t given = 0;
    for (std::size_t i : open) {
      const double exact = static_cast<double>(remaining) * weights[i] / total;
      share[i] = static_cast<std::size_t>(std::floor(exact));
      given += share[i];
      rema.emplace_back(exact - std::floor(exact), i);
    }
    // Largest remainder first; ties go to the lower pool index.
    std::stable_sort(rema.begin(), rema.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
    for (std::size_t k = 0; given < remaining && k < rema.size(); ++k, ++given) ++share[rema[k].second];

    std::size_t placed = 0;
    for (std::size_t i : open) {
      const std::size_t take = std::min(share[i], sizes[i] - out[i]);
      out[i] += take;
      placed += take;
    }
    remaining -= placed;
    if (placed == 0) {
      // Only rounding could stall here; hand single images out in index order.
      for (std::size_t i : open) {
        if (remaining == 0) break;
        ++out[i];
        --remaining;
      }
    }
  }
  return out;
}

MixResult mix(const MixSpec &spec) {
  const std::size_t target = mix_target(spec.percentage, spec.real.images.size());
  std::vector<double> weights;
  std::vector<std::size_t> sizes;
  for (const auto &p : spec.pools) {
    weights.push_back(p.weight);
    sizes.push_back(p.dataset.images.size());
  }
  if (target > 0 && spec.pools.empty()) raise(ErrorCode::kPoolExhausted, "no pools to draw from");

  auto same_categories = [](std::vector<Category> a, std::vector<Category> b) {
    auto by_id = [](const Category &x, const Category &y) { return x.id < y.id; };
    std::sort(a.begin(), a.end(), by_id);
    std::sort(b.begin(), b.end(), by_id);
    return a == b;
  };
  for (std::size_t i = 0; i < spec.pools.size(); ++i)
    if (!same_categories(spec.real.categories, spec.pools[i].dataset.categories))
      raise(ErrorCode::kCategoryMismatch, "pool " + std::to_string(i) + " has a different category table");

  const std::vector<std::size_t> quota = spec.pools.empty() ? std::vector<std::size_t>{} : apportion(target, weights, sizes);

  MixResult result;
  result.manifest = MixManifest{spec.seed, spec.percentage, spec.real.images.size(), target, {}};
  result.dataset = spec.real;
  for (std::size_t i = 0; i < spec.pools.size(); ++i) {
    const Dataset &pool = spec.pools[i].dataset;
    const auto order = permutation(pool.images.size(), derive_key(spec.seed, {0x31, i}));
    PoolSelection sel{i, spec.pools[i].weight, {}};
    Dataset picked;
    picked.categories = pool.categories;
    std::unordered_set<std::int64_t> ids;
    for (std::size_t k = 0; k < quota[i]; ++k) {
      const ImageRecord &r = pool.images[order[k]];
      sel.chosen_ids.push_back(r.id);
      ids.insert(r.id);
      picked.images.push_back(r);
    }
    for (const auto &a : pool.annotations)
      if (ids.count(a.image_id)) picked.annotations.push_back(a);
    result.manifest.pools.push_back(std::move(sel));
    if (!picked.images.empty()) result.dataset = merge_datasets(result.dataset, picked);
  }
  return result;
}

std::string manifest_to_text(const MixManifest &m) {
  nlohmann::ordered_json root;
  root["seed"] = m.seed;
  root["percentage"] = m.percentage;
  root["real_images"] = m.real_images;
  root["target"] = m.target;
  root["pools"] = nlohmann::ordered_json::array();
  for (const auto &p : m.pools)
    root["pools"].push_back(nlohmann::ordered_json{
        {"index", p.pool_index}, {"weight", p.weight}, {"count", p.chosen_ids.size()}, {"chosen_ids", p.chosen_ids}});
  return root.dump(2) + "\n";
}

MixManifest parse_manifest_text(std::string_view text) {
  try {
    const auto root = nlohmann::json::parse(text.begin(), text.end());
    MixManifest m;
    m.seed = root.at("seed").get<std::uint64_t>();
    m.percentage = root.at("percentage").get<double>();
    m.real_images = root.at("real_images").get<std::size_t>();
    m.target = root.at("target").get<std::size_t>();
    for (const auto &p : root.at("pools"))
      m.pools.push_back(PoolSelection{p.at("index").get<std::size_t>(), p.at("weight").get<double>(),
                                      p.at("chosen_ids").get<std::vector<std::int64_t>>()});
    return m;
  } catch (const nlohmann::json::parse_error &e) {
    raise(ErrorCode::kSyntaxError, std::string("manifest: ") + e.what());
  } catch (const nlohmann::json::exception &e) {
    raise(ErrorCode::kSchemaError, std::string("manifest: ") + e.what());
  }
}

}  // namespace thermaug
