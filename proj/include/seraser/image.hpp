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

#ifndef SERASER_IMAGE_HPP_
#define SERASER_IMAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace seraser {

// Dense H x W x C image, row-major, pixel values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> pixels;  // size = height * width * channels

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0);

  double& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  void validate() const;  // throws std::invalid_argument on out-of-range pixels

  // Snap every pixel to the nearest 8-bit level so a PNG write/read round
  // trip reproduces the in-memory image exactly.
  void quantize_to_8bit();

  bool operator==(const Image& other) const = default;
};

// Binary foreground mask aligned with one image.
struct ForegroundMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;  // nonzero = foreground
  std::string provenance = "toy-exact";  // or "file"

  ForegroundMask() = default;
  ForegroundMask(int h, int w);

  bool at(int y, int x) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int y, int x, bool fg) {
    bits[static_cast<std::size_t>(y) * width + x] = fg ? 1 : 0;
  }
  std::size_t foreground_count() const;
};

// Axis-aligned box, [y0, y1) x [x0, x1).
struct Box {
  int y0 = 0;
  int x0 = 0;
  int y1 = 0;
  int x1 = 0;

  bool contains(int y, int x) const {
    return y >= y0 && y < y1 && x >= x0 && x < x1;
  }
  bool operator==(const Box& other) const = default;
};

// Bounding boxes of the 8-connected foreground regions, in discovery order
// (row-major scan of region seeds).
std::vector<Box> connected_region_boxes(const ForegroundMask& mask);

// Nearest-neighbor resample to (out_h, out_w).
Image resize_nearest(const Image& src, int out_h, int out_w);

// Rectangular crop; the box must lie inside the image.
Image crop(const Image& src, const Box& box);

std::uint64_t image_hash(const Image& img);

}  // namespace seraser

#endif  // SERASER_IMAGE_HPP_
