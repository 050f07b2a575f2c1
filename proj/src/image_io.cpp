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
#include "thermaug/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "thermaug/error.hpp"

namespace thermaug {
namespace {

namespace fs = std::filesystem;

std::vector<unsigned char> read_all(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorCode::kIoError, "read failed: " + path.string());
  return bytes;
}

class PnmHeaderReader {
 public:
  PnmHeaderReader(const std::vector<unsigned char> &bytes, const fs::path &path) : bytes_(bytes), path_(path) {}

  long long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      raise(ErrorCode::kUnsupportedFormat, "malformed PNM header in " + path_.string());
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1LL << 31)) raise(ErrorCode::kUnsupportedFormat, "PNM header value too large in " + path_.string());
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      raise(ErrorCode::kUnsupportedFormat, "malformed PNM header in " + path_.string());
    return pos_ + 1;
  }

  void skip(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char> &bytes_;
  const fs::path &path_;
  std::size_t pos_ = 0;
};

std::uint8_t luma(unsigned r, unsigned g, unsigned b) {
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

GrayImage decode_pnm(const std::vector<unsigned char> &bytes, const fs::path &path, const LoadOptions &opts) {
  const bool color = bytes[1] == '6';
  PnmHeaderReader hdr(bytes, path);
  hdr.skip(2);
  const long long w = hdr.next_int();
  const long long h = hdr.next_int();
  const long long maxval = hdr.next_int();
  const std::size_t off = hdr.raster_offset();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    raise(ErrorCode::kUnsupportedFormat, "invalid PNM dimensions or maxval in " + path.string());
  if (color && !opts.convert_to_gray)
    raise(ErrorCode::kUnsupportedFormat, "colour PPM input requires grayscale conversion: " + path.string());
  const bool wide = maxval > 255;
  if (wide && !opts.convert_to_gray)
    raise(ErrorCode::kUnsupportedFormat, "16-bit PNM input requires conversion: " + path.string());

  const std::size_t channels = color ? 3 : 1;
  const std::size_t sample_bytes = wide ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w * h) * channels * sample_bytes;
  if (bytes.size() < off + need) raise(ErrorCode::kIoError, "truncated PNM raster in " + path.string());

  const unsigned char *p = bytes.data() + off;
  auto sample = [&](std::size_t i) -> unsigned {
    unsigned v = wide ? (unsigned(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
    if (maxval == 255) return v;
    v = std::min<unsigned>(v, static_cast<unsigned>(maxval));
    return static_cast<unsigned>((v * 255ULL * 2 + maxval) / (2 * maxval));
  };
  GrayImage img(h, w);
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    img.data()[i] = color ? luma(sample(3 * k), sample(3 * k + 1), sample(3 * k + 2))
                          : static_cast<std::uint8_t>(sample(k));
  }
  return img;
}

GrayImage decode_png(const std::vector<unsigned char> &bytes, const fs::path &path, const LoadOptions &opts) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    raise(ErrorCode::kIoError, "cannot decode PNG " + path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool linear = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  if (!opts.convert_to_gray && (color || linear || alpha)) {
    png_image_free(&image);
    raise(ErrorCode::kUnsupportedFormat,
          std::string(color ? "colour" : linear ? "16-bit" : "alpha") + " PNG input requires conversion: " +
              path.string());
  }
  image.format = PNG_FORMAT_GRAY;
  GrayImage img(image.height, image.width);
  if (!png_image_finish_read(&image, nullptr, img.data(), static_cast<png_int_32>(image.width), nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    raise(ErrorCode::kIoError, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

std::string lower_ext(const fs::path &path) {
  std::string ext = path.extension().string();
  for (char &c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

void write_bytes(const fs::path &path, const void *data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(static_cast<const char *>(data), static_cast<std::streamsize>(n));
  if (!out) raise(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace

GrayImage load_image(const fs::path &path, const LoadOptions &opts) {
  const auto bytes = read_all(path);
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes, path, opts);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_pnm(bytes, path, opts);
  raise(ErrorCode::kUnsupportedFormat, "unrecognised image format: " + path.string());
}

void save_image(const GrayImage &img, const fs::path &path) {
  const std::string ext = lower_ext(path);
  if (ext != ".pgm" && ext != ".png") raise(ErrorCode::kUnsupportedFormat, "cannot write format of " + path.string());
  if (img.size() == 0) raise(ErrorCode::kInvalidArgument, "cannot save an empty image: " + path.string());
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);

  if (ext == ".pgm") {
    std::string data = "P5\n" + std::to_string(width(img)) + " " + std::to_string(height(img)) + "\n255\n";
    data.append(reinterpret_cast<const char *>(img.data()), static_cast<std::size_t>(img.size()));
    write_bytes(path, data.data(), data.size());
    return;
  }

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width(img));
  image.height = static_cast<png_uint_32>(height(img));
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.data(), 0, nullptr))
    raise(ErrorCode::kIoError, "cannot encode PNG " + path.string() + ": " + image.message);
  std::vector<unsigned char> buf(size);
  if (!png_image_write_to_memory(&image, buf.data(), &size, 0, img.data(), 0, nullptr))
    raise(ErrorCode::kIoError, "cannot encode PNG " + path.string() + ": " + image.message);
  write_bytes(path, buf.data(), size);
}

}  // namespace thermaug
