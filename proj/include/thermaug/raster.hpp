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

#include <Eigen/Core>

namespace thermaug {

/// Row-major dense plane: rows are image lines (y), columns are x.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Plane<std::uint8_t>;
using Mask = Plane<bool>;

template <typename Scalar>
inline int width(const Plane<Scalar> &p) {
  return static_cast<int>(p.cols());
}

template <typename Scalar>
inline int height(const Plane<Scalar> &p) {
  return static_cast<int>(p.rows());
}

template <typename A, typename B>
inline bool same_extent(const Plane<A> &a, const Plane<B> &b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

/// Integer pixel rectangle, half-open: [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool empty() const { return w <= 0 || h <= 0; }
  long long area() const { return empty() ? 0 : static_cast<long long>(w) * h; }
  friend bool operator==(const Rect &, const Rect &) = default;
};

Rect intersect(const Rect &a, const Rect &b);

template <typename Scalar>
inline Rect extent_of(const Plane<Scalar> &p) {
  return Rect{0, 0, width(p), height(p)};
}

inline bool contains(const Rect &outer, const Rect &inner) {
  return inner.x >= outer.x && inner.y >= outer.y && inner.right() <= outer.right() &&
         inner.bottom() <= outer.bottom();
}

inline GrayImage constant_image(int w, int h, std::uint8_t v) { return GrayImage::Constant(h, w, v); }

/// 8-bit mask encoding used on disk: set bits are 255, clear bits 0.
GrayImage mask_to_gray(const Mask &mask);
/// Any non-zero pixel counts as set.
Mask gray_to_mask(const GrayImage &img);

// Intensity transforms. All return a new image of the input's extent.

/// Discrete histogram equalization:
/// out(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255). Constant images are unchanged.
GrayImage equalize(const GrayImage &img);

/// Pixels >= threshold become 255 - v.
GrayImage solarize(const GrayImage &img, int threshold);

/// Linear remap of [min, max] onto [0, 255]; constant images unchanged.
GrayImage autocontrast(const GrayImage &img);

/// Multiplies by factor (>= 0), rounds and clamps to [0, 255].
GrayImage brightness(const GrayImage &img, double factor);

// Geometric transforms.

/// Shifts the content of `region` by (dx, dy), confined to the region. Pixels
/// of the region with no source inside the region take `fill`. Throws
/// RegionOutOfBounds if the region is not inside the image.
GrayImage translate_region(const GrayImage &img, const Rect &region, int dx, int dy, std::uint8_t fill = 0);

inline GrayImage translate(const GrayImage &img, int dx, int dy, std::uint8_t fill = 0) {
  return translate_region(img, extent_of(img), dx, dy, fill);
}

/// Square of side `size` starting at center - size/2, clipped to the image.
Rect cutout_rect(int cx, int cy, int size);

/// Fills cutout_rect(cx, cy, size) clipped to the image. size must be > 0.
GrayImage cutout(const GrayImage &img, int cx, int cy, int size, std::uint8_t fill = 0);

/// Nearest-neighbour resize to (w, h); w, h >= 1.
template <typename Scalar>
Plane<Scalar> resize_nearest(const Plane<Scalar> &src, int w, int h) {
  Plane<Scalar> out(h, w);
  const long long sw = src.cols();
  const long long sh = src.rows();
  for (int y = 0; y < h; ++y) {
    const auto sy = static_cast<Eigen::Index>(y * sh / h);
    for (int x = 0; x < w; ++x) out(y, x) = src(sy, static_cast<Eigen::Index>(x * sw / w));
  }
  return out;
}

}  // namespace thermaug
