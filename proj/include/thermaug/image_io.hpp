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

#include <filesystem>

#include "thermaug/raster.hpp"

namespace thermaug {

struct LoadOptions {
  /// Allow colour (luma conversion) and >8-bit (rescaled) inputs.
  bool convert_to_gray = false;
};

/// Reads binary PGM (P5) or PNG, detected from the file signature.
GrayImage load_image(const std::filesystem::path &path, const LoadOptions &opts = {});

/// Writes P5 PGM for `.pgm`, 8-bit grayscale PNG for `.png`; any other
/// extension is UnsupportedFormat. Parent directories are created.
void save_image(const GrayImage &img, const std::filesystem::path &path);

inline Mask load_mask(const std::filesystem::path &path) { return gray_to_mask(load_image(path)); }
inline void save_mask(const Mask &mask, const std::filesystem::path &path) { save_image(mask_to_gray(mask), path); }

}  // namespace thermaug
