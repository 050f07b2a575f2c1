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
#include <gtest/gtest.h>
#include <png.h>

#include <cstring>
#include <fstream>

#include "support/fixtures.hpp"
#include "thermaug/error.hpp"
#include "thermaug/image_io.hpp"

namespace thermaug {
namespace {

namespace fs = std::filesystem;

void write_raw(const fs::path &p, const std::string &bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

void write_png(const fs::path &p, int w, int h, png_uint_32 format, const void *data) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = w;
  image.height = h;
  image.format = format;
  ASSERT_TRUE(png_image_write_to_file(&image, p.c_str(), 0, data, 0, nullptr)) << image.message;
}

TEST(ImageIo, DecodesTinyPgm) {
  testing::TempDir dir;
  write_raw(dir / "tiny.pgm", std::string("P5\n# comment line\n2 2\n255\n") + std::string("\x00\x80\xff\x07", 4));
  const GrayImage img = load_image(dir / "tiny.pgm");
  ASSERT_EQ(width(img), 2);
  ASSERT_EQ(height(img), 2);
  EXPECT_EQ(img(0, 0), 0);
  EXPECT_EQ(img(0, 1), 128);
  EXPECT_EQ(img(1, 0), 255);
  EXPECT_EQ(img(1, 1), 7);
}

TEST(ImageIo, RoundTripsBothFormats) {
  testing::TempDir dir;
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const GrayImage img = testing::random_image(rng, 1 + int(rng.below(40)), 1 + int(rng.below(30)));
    for (const char *ext : {".png", ".pgm"}) {
      const fs::path p = dir / ("img" + std::to_string(t) + ext);
      save_image(img, p);
      const GrayImage back = load_image(p);
      ASSERT_TRUE(same_extent(back, img));
      EXPECT_TRUE((back == img).all()) << p;
    }
  }
}

TEST(ImageIo, MaskRoundTripStoresZeroAnd255) {
  testing::TempDir dir;
  Rng rng(2);
  const Mask m = testing::random_mask(rng, 9, 7, 0.4);
  save_mask(m, dir / "m.png");
  const GrayImage raw = load_image(dir / "m.png");
  EXPECT_TRUE(((raw == 0) || (raw == 255)).all());
  EXPECT_TRUE((load_mask(dir / "m.png") == m).all());
}

TEST(ImageIo, SixteenBitNeedsConversion) {
  testing::TempDir dir;
  std::string body = "P5\n2 1\n65535\n";
  body += std::string("\xff\xff\x00\x00", 4);
  write_raw(dir / "wide.pgm", body);
  EXPECT_EQ(code_of([&] { load_image(dir / "wide.pgm"); }), ErrorCode::kUnsupportedFormat);
  const GrayImage img = load_image(dir / "wide.pgm", LoadOptions{.convert_to_gray = true});
  EXPECT_EQ(img(0, 0), 255);
  EXPECT_EQ(img(0, 1), 0);

  const std::uint16_t px[2] = {65535, 0};
  write_png(dir / "wide.png", 2, 1, PNG_FORMAT_LINEAR_Y, px);
  EXPECT_EQ(code_of([&] { load_image(dir / "wide.png"); }), ErrorCode::kUnsupportedFormat);
  EXPECT_NO_THROW(load_image(dir / "wide.png", LoadOptions{.convert_to_gray = true}));
}

TEST(ImageIo, ColourNeedsConversion) {
  testing::TempDir dir;
  const unsigned char rgb[6] = {255, 0, 0, 10, 10, 10};
  write_png(dir / "rgb.png", 2, 1, PNG_FORMAT_RGB, rgb);
  EXPECT_EQ(code_of([&] { load_image(dir / "rgb.png"); }), ErrorCode::kUnsupportedFormat);
  const GrayImage img = load_image(dir / "rgb.png", LoadOptions{.convert_to_gray = true});
  EXPECT_EQ(width(img), 2);

  write_raw(dir / "rgb.ppm", std::string("P6\n1 1\n255\n") + std::string("\x64\x64\x64", 3));
  EXPECT_EQ(code_of([&] { load_image(dir / "rgb.ppm"); }), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(load_image(dir / "rgb.ppm", LoadOptions{.convert_to_gray = true})(0, 0), 100);
}

TEST(ImageIo, Errors) {
  testing::TempDir dir;
  EXPECT_EQ(code_of([&] { load_image(dir / "missing.png"); }), ErrorCode::kIoError);
  write_raw(dir / "short.pgm", "P5\n4 4\n255\nabc");
  EXPECT_EQ(code_of([&] { load_image(dir / "short.pgm"); }), ErrorCode::kIoError);
  write_raw(dir / "junk.bin", "hello world");
  EXPECT_EQ(code_of([&] { load_image(dir / "junk.bin"); }), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(code_of([&] { save_image(constant_image(2, 2, 0), dir / "x.jpg"); }), ErrorCode::kUnsupportedFormat);

  save_image(constant_image(8, 8, 3), dir / "ok.png");
  std::string bytes = read_text_file(dir / "ok.png");
  write_raw(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(code_of([&] { load_image(dir / "cut.png"); }), ErrorCode::kIoError);
}

TEST(ImageIo, PngOutputIsByteStable) {
  testing::TempDir dir;
  Rng rng(3);
  const GrayImage img = testing::random_image(rng, 33, 17);
  save_image(img, dir / "a.png");
  save_image(img, dir / "b.png");
  EXPECT_EQ(read_text_file(dir / "a.png"), read_text_file(dir / "b.png"));
}

}  // namespace
}  // namespace thermaug
