/*
 * Copyright 2025 The seraser authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seraser/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "seraser/errors.hpp"

namespace seraser {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::vector<std::uint8_t> to_bytes(const Image& img) {
  std::vector<std::uint8_t> bytes(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = img.pixels[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("pixel out of [0, 1] while writing PNG");
    }
    bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return bytes;
}

void write_png_bytes(const std::filesystem::path& path, int height, int width,
                     int channels, const std::uint8_t* bytes) {
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("PNG writer supports 1 or 3 channels");
  }
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("cannot open for writing: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes +
                                    static_cast<std::size_t>(y) * width * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void read_png_bytes(const std::filesystem::path& path, int& height, int& width,
                    int& channels, std::vector<std::uint8_t>& bytes) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("cannot open for reading: " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng read failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  // Normalize oddball formats down to 8-bit gray or RGB.
  png_set_strip_16(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  }
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  height = static_cast<int>(png_get_image_height(png, info));
  width = static_cast<int>(png_get_image_width(png, info));
  channels = static_cast<int>(png_get_channels(png, info));
  bytes.resize(static_cast<std::size_t>(height) * width * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = bytes.data() + static_cast<std::size_t>(y) * width * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& img) {
  const auto bytes = to_bytes(img);
  write_png_bytes(path, img.height, img.width, img.channels, bytes.data());
}

Image read_png(const std::filesystem::path& path) {
  int h = 0, w = 0, c = 0;
  std::vector<std::uint8_t> bytes;
  read_png_bytes(path, h, w, c, bytes);
  Image img(h, w, c);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    img.pixels[i] = bytes[i] / 255.0;
  }
  return img;
}

void write_mask_png(const std::filesystem::path& path,
                    const ForegroundMask& mask) {
  std::vector<std::uint8_t> bytes(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    bytes[i] = mask.bits[i] ? 255 : 0;
  }
  write_png_bytes(path, mask.height, mask.width, 1, bytes.data());
}

ForegroundMask read_mask_png(const std::filesystem::path& path) {
  int h = 0, w = 0, c = 0;
  std::vector<std::uint8_t> bytes;
  read_png_bytes(path, h, w, c, bytes);
  if (c != 1) {
    throw ParseError("mask PNG must be single-channel: " + path.string());
  }
  ForegroundMask mask(h, w);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    mask.bits[i] = bytes[i] ? 1 : 0;
  }
  mask.provenance = "file";
  return mask;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file_atomic(const std::filesystem::path& path,
                            const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

}  // namespace seraser
