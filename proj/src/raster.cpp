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
#include "thermaug/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "thermaug/error.hpp"

namespace thermaug {

Rect intersect(const Rect &a, const Rect &b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return Rect{x0, y0, 0, 0};
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

GrayImage mask_to_gray(const Mask &mask) {
  return mask.select(GrayImage::Constant(mask.rows(), mask.cols(), 255),
                     GrayImage::Zero(mask.rows(), mask.cols()));
}

Mask gray_to_mask(const GrayImage &img) { return img != 0; }

GrayImage equalize(const GrayImage &img) {
  std::array<long long, 256> hist{};
  for (Eigen::Index i = 0; i < img.size(); ++i) ++hist[img.data()[i]];
  const long long n = img.size();
  long long cdf_min = 0;
  for (long long c : hist) {
    if (c > 0) {
      cdf_min = c;
      break;
    }
  }
  if (n == 0 || cdf_min == n) return img;

  // Integer round-half-up of num / den.
  const long long den = n - cdf_min;
  std::array<std::uint8_t, 256> lut{};
  long long cdf = 0;
  for (int v = 0; v < 256; ++v) {
    cdf += hist[v];
    const long long num = std::max(0LL, cdf - cdf_min) * 255;
    lut[v] = static_cast<std::uint8_t>((2 * num + den) / (2 * den));
  }
  return img.unaryExpr([&lut](std::uint8_t v) { return lut[v]; });
}

GrayImage solarize(const GrayImage &img, int threshold) {
  if (threshold < 0 || threshold > 255)
    raise(ErrorCode::kInvalidArgument, "solarize threshold " + std::to_string(threshold) + " outside 0..255");
  return img.unaryExpr([threshold](std::uint8_t v) {
    return v >= threshold ? static_cast<std::uint8_t>(255 - v) : v;
  });
}

GrayImage autocontrast(const GrayImage &img) {
  if (img.size() == 0) return img;
  const int lo = img.minCoeff();
  const int hi = img.maxCoeff();
  if (lo == hi) return img;
  const int span = hi - lo;
  return img.unaryExpr([lo, span](std::uint8_t v) {
    return static_cast<std::uint8_t>((2 * (v - lo) * 255 + span) / (2 * span));
  });
}

GrayImage brightness(const GrayImage &img, double factor) {
  if (!(factor >= 0.0)) raise(ErrorCode::kInvalidArgument, "brightness factor must be >= 0");
  return img.unaryExpr([factor](std::uint8_t v) {
    const double s = std::round(static_cast<double>(v) * factor);
    return static_cast<std::uint8_t>(std::clamp(s, 0.0, 255.0));
  });
}

GrayImage translate_region(const GrayImage &img, const Rect &region, int dx, int dy, std::uint8_t fill) {
  if (region.w < 0 || region.h < 0 || !contains(extent_of(img), region))
    raise(ErrorCode::kRegionOutOfBounds, "region [" + std::to_string(region.x) + "," + std::to_string(region.y) +
                                             "," + std::to_string(region.w) + "," + std::to_string(region.h) +
                                             "] outside " + std::to_string(width(img)) + "x" +
                                             std::to_string(height(img)) + " image");
  GrayImage out = img;
  if (region.empty() || (dx == 0 && dy == 0)) return out;
  auto block = out.block(region.y, region.x, region.h, region.w);
  block.setConstant(fill);
  const Rect src_local{0, 0, region.w, region.h};
  const Rect shifted = intersect(Rect{dx, dy, region.w, region.h}, src_local);
  if (shifted.empty()) return out;
  // shifted is the destination window in region-local coordinates.
  block.block(shifted.y, shifted.x, shifted.h, shifted.w) =
      img.block(region.y + shifted.y - dy, region.x + shifted.x - dx, shifted.h, shifted.w);
  return out;
}

Rect cutout_rect(int cx, int cy, int size) { return Rect{cx - size / 2, cy - size / 2, size, size}; }

GrayImage cutout(const GrayImage &img, int cx, int cy, int size, std::uint8_t fill) {
  if (size <= 0) raise(ErrorCode::kInvalidArgument, "cutout size must be > 0");
  GrayImage out = img;
  const Rect r = intersect(cutout_rect(cx, cy, size), extent_of(img));
  if (!r.empty()) out.block(r.y, r.x, r.h, r.w).setConstant(fill);
  return out;
}

}  // namespace thermaug
