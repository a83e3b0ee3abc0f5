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

#include "seraser/image.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "seraser/rng.hpp"

namespace seraser {

Image::Image(int h, int w, int c, double fill)
    : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
  pixels.assign(static_cast<std::size_t>(h) * w * c, fill);
}

void Image::validate() const {
  if (pixels.size() != static_cast<std::size_t>(height) * width * channels) {
    throw std::invalid_argument("image buffer size does not match dimensions");
  }
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("pixel value out of [0, 1]: " +
                                  std::to_string(v));
    }
  }
}

void Image::quantize_to_8bit() {
  for (double& v : pixels) {
    v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  }
}

ForegroundMask::ForegroundMask(int h, int w) : height(h), width(w) {
  if (h <= 0 || w <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  bits.assign(static_cast<std::size_t>(h) * w, 0);
}

std::size_t ForegroundMask::foreground_count() const {
  std::size_t n = 0;
  for (auto b : bits) n += (b != 0);
  return n;
}

std::vector<Box> connected_region_boxes(const ForegroundMask& mask) {
  std::vector<Box> boxes;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * mask.width + x;
      if (!mask.bits[idx] || seen[idx]) continue;
      Box box{y, x, y + 1, x + 1};
      std::deque<std::pair<int, int>> frontier{{y, x}};
      seen[idx] = 1;
      while (!frontier.empty()) {
        auto [cy, cx] = frontier.front();
        frontier.pop_front();
        box.y0 = std::min(box.y0, cy);
        box.x0 = std::min(box.x0, cx);
        box.y1 = std::max(box.y1, cy + 1);
        box.x1 = std::max(box.x1, cx + 1);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int ny = cy + dy;
            const int nx = cx + dx;
            if (ny < 0 || ny >= mask.height || nx < 0 || nx >= mask.width) {
              continue;
            }
            const std::size_t nidx =
                static_cast<std::size_t>(ny) * mask.width + nx;
            if (mask.bits[nidx] && !seen[nidx]) {
              seen[nidx] = 1;
              frontier.emplace_back(ny, nx);
            }
          }
        }
      }
      boxes.push_back(box);
    }
  }
  return boxes;
}

Image resize_nearest(const Image& src, int out_h, int out_w) {
  Image out(out_h, out_w, src.channels);
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(src.height - 1,
                            static_cast<int>(static_cast<std::int64_t>(y) *
                                             src.height / out_h));
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min(src.width - 1,
                              static_cast<int>(static_cast<std::int64_t>(x) *
                                               src.width / out_w));
      for (int c = 0; c < src.channels; ++c) {
        out.at(y, x, c) = src.at(sy, sx, c);
      }
    }
  }
  return out;
}

Image crop(const Image& src, const Box& box) {
  if (box.y0 < 0 || box.x0 < 0 || box.y1 > src.height || box.x1 > src.width ||
      box.y0 >= box.y1 || box.x0 >= box.x1) {
    throw std::invalid_argument("crop box out of bounds");
  }
  Image out(box.y1 - box.y0, box.x1 - box.x0, src.channels);
  for (int y = box.y0; y < box.y1; ++y) {
    for (int x = box.x0; x < box.x1; ++x) {
      for (int c = 0; c < src.channels; ++c) {
        out.at(y - box.y0, x - box.x0, c) = src.at(y, x, c);
      }
    }
  }
  return out;
}

std::uint64_t image_hash(const Image& img) {
  std::uint64_t h = fnv1a64(&img.height, sizeof(img.height));
  h = fnv1a64(&img.width, sizeof(img.width), h);
  h = fnv1a64(&img.channels, sizeof(img.channels), h);
  return fnv1a64(img.pixels.data(), img.pixels.size() * sizeof(double), h);
}

}  // namespace seraser
