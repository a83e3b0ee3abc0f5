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

#include "seraser/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seraser/rng.hpp"

namespace seraser {

namespace {

Image flip_horizontal(const Image& x) {
  Image out(x.height, x.width, x.channels);
  for (int y = 0; y < x.height; ++y) {
    for (int xi = 0; xi < x.width; ++xi) {
      for (int c = 0; c < x.channels; ++c) {
        out.at(y, xi, c) = x.at(y, x.width - 1 - xi, c);
      }
    }
  }
  return out;
}

Image translate(const Image& x, int dy, int dx) {
  Image out(x.height, x.width, x.channels, 0.0);
  for (int y = 0; y < x.height; ++y) {
    const int sy = y - dy;
    if (sy < 0 || sy >= x.height) continue;
    for (int xi = 0; xi < x.width; ++xi) {
      const int sx = xi - dx;
      if (sx < 0 || sx >= x.width) continue;
      for (int c = 0; c < x.channels; ++c) out.at(y, xi, c) = x.at(sy, sx, c);
    }
  }
  return out;
}

Image rotate_nearest(const Image& x, double radians) {
  Image out(x.height, x.width, x.channels, 0.0);
  const double cy = (x.height - 1) / 2.0;
  const double cx = (x.width - 1) / 2.0;
  const double cos_a = std::cos(radians);
  const double sin_a = std::sin(radians);
  for (int y = 0; y < x.height; ++y) {
    for (int xi = 0; xi < x.width; ++xi) {
      // Inverse mapping: rotate the destination pixel back into the source.
      const double ry = y - cy;
      const double rx = xi - cx;
      const int sy = static_cast<int>(std::lround(cy + cos_a * ry + sin_a * rx));
      const int sx = static_cast<int>(std::lround(cx - sin_a * ry + cos_a * rx));
      if (sy < 0 || sy >= x.height || sx < 0 || sx >= x.width) continue;
      for (int c = 0; c < x.channels; ++c) out.at(y, xi, c) = x.at(sy, sx, c);
    }
  }
  return out;
}

Image color_jitter(const Image& x, double contrast, double brightness) {
  if (contrast == 1.0 && brightness == 0.0) return x;
  Image out = x;
  for (double& v : out.pixels) {
    v = std::clamp(contrast * (v - 0.5) + 0.5 + brightness, 0.0, 1.0);
  }
  return out;
}

Image cutout(const Image& x, int size, int top, int left) {
  Image out = x;
  for (int y = top; y < std::min(top + size, x.height); ++y) {
    for (int xi = left; xi < std::min(left + size, x.width); ++xi) {
      for (int c = 0; c < x.channels; ++c) out.at(y, xi, c) = 0.0;
    }
  }
  return out;
}

}  // namespace

std::string to_string(AugmentOp op) {
  switch (op) {
    case AugmentOp::kFlip:
      return "flip";
    case AugmentOp::kTranslate:
      return "translate";
    case AugmentOp::kRotate:
      return "rotate";
    case AugmentOp::kColorJitter:
      return "color-jitter";
    case AugmentOp::kCutout:
      return "cutout";
  }
  throw std::invalid_argument("unknown augment op");
}

AugmentOp augment_op_from_string(const std::string& name) {
  if (name == "flip") return AugmentOp::kFlip;
  if (name == "translate") return AugmentOp::kTranslate;
  if (name == "rotate") return AugmentOp::kRotate;
  if (name == "color-jitter") return AugmentOp::kColorJitter;
  if (name == "cutout") return AugmentOp::kCutout;
  throw std::invalid_argument("unknown augment op: " + name);
}

void AugmentPolicy::validate() const {
  if (ops_per_view < 0) throw std::invalid_argument("ops_per_view must be >= 0");
  if (magnitude < 0 || magnitude > 30) {
    throw std::invalid_argument("augment magnitude must be in [0, 30]");
  }
}

Image augment_view(const Image& x, const AugmentPolicy& policy,
                   std::uint64_t seed, int view_index) {
  policy.validate();
  Rng rng(derive_seed(seed, "augment-view", std::to_string(view_index)));
  const double level = policy.magnitude / 30.0;
  Image out = x;
  if (policy.allowed_ops.empty()) return out;
  for (int i = 0; i < policy.ops_per_view; ++i) {
    const auto op = policy.allowed_ops[rng.uniform_below(policy.allowed_ops.size())];
    switch (op) {
      case AugmentOp::kFlip:
        out = flip_horizontal(out);
        break;
      case AugmentOp::kTranslate: {
        const int shift = static_cast<int>(std::lround(level * 0.3 * x.width));
        const int dy = shift == 0 ? 0 : rng.uniform_int(-shift, shift);
        const int dx = shift == 0 ? 0 : rng.uniform_int(-shift, shift);
        out = translate(out, dy, dx);
        break;
      }
      case AugmentOp::kRotate: {
        const double max_deg = level * 30.0;
        const double deg = rng.uniform(-max_deg, max_deg);
        out = rotate_nearest(out, deg * 3.14159265358979323846 / 180.0);
        break;
      }
      case AugmentOp::kColorJitter: {
        const double contrast = 1.0 + level * 0.8 * (2.0 * rng.uniform() - 1.0);
        const double brightness = level * 0.4 * (2.0 * rng.uniform() - 1.0);
        out = color_jitter(out, contrast, brightness);
        break;
      }
      case AugmentOp::kCutout: {
        const int size =
            static_cast<int>(std::lround(level * 0.4 * std::min(x.height, x.width)));
        if (size > 0) {
          const int top = rng.uniform_int(0, x.height - size);
          const int left = rng.uniform_int(0, x.width - size);
          out = cutout(out, size, top, left);
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace seraser
