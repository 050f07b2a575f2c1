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
#include <string>
#include <vector>

#include "thermaug/annotations.hpp"

namespace thermaug {

struct MixPool {
  Dataset dataset;
  double weight = 1.0;
};

struct MixSpec {
  Dataset real;
  std::vector<MixPool> pools;
  double percentage = 0.10;
  std::uint64_t seed = 0;
};

struct PoolSelection {
  std::size_t pool_index = 0;
  double weight = 0;
  /// Image ids as they appear in the pool dataset, in draw order.
  std::vector<std::int64_t> chosen_ids;
  friend bool operator==(const PoolSelection &, const PoolSelection &) = default;
};

struct MixManifest {
  std::uint64_t seed = 0;
  double percentage = 0;
  std::size_t real_images = 0;
  std::size_t target = 0;
  std::vector<PoolSelection> pools;
  friend bool operator==(const MixManifest &, const MixManifest &) = default;
};

/// Lower end of the 10-20 % range in which added synthetic data helped most.
constexpr double default_percentage() { return 0.10; }

/// Images to add: floor(percentage * real_images).
std::size_t mix_target(double percentage, std::size_t real_images);

/// Largest-remainder split of `target` across pools by weight, never
/// exceeding a pool's size; overflow is redistributed to pools that still
/// have room. Throws PoolExhausted if the pools cannot cover `target`.
std::vector<std::size_t> apportion(std::size_t target, const std::vector<double> &weights,
                                   const std::vector<std::size_t> &sizes);

struct MixResult {
  Dataset dataset;
  MixManifest manifest;
};

MixResult mix(const MixSpec &spec);

std::string manifest_to_text(const MixManifest &m);
MixManifest parse_manifest_text(std::string_view text);

}  // namespace thermaug
