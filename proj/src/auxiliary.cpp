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

#include "seraser/auxiliary.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "seraser/errors.hpp"
#include "seraser/rng.hpp"

namespace seraser {

namespace {

constexpr int kPatchGrid = 8;   // "Patches" tiling: an 8x8 grid of tiles
constexpr int kShuffleTile = 4;  // shuffle scrambles 4x4-pixel tiles

void check_mask_matches(const Image& x, const ForegroundMask& mask) {
  if (mask.height != x.height || mask.width != x.width) {
    throw std::invalid_argument("mask dimensions do not match the image");
  }
}

// Marks pixels covered by the union of foreground region boxes.
std::vector<std::uint8_t> box_union(const Image& x, const ForegroundMask& mask) {
  std::vector<std::uint8_t> covered(
      static_cast<std::size_t>(x.height) * x.width, 0);
  for (const Box& box : connected_region_boxes(mask)) {
    for (int y = box.y0; y < box.y1; ++y) {
      for (int x0 = box.x0; x0 < box.x1; ++x0) {
        covered[static_cast<std::size_t>(y) * x.width + x0] = 1;
      }
    }
  }
  return covered;
}

}  // namespace

std::string to_string(AuxStrategy strategy) {
  switch (strategy) {
    case AuxStrategy::kAnnotationBackground:
      return "annotation-background";
    case AuxStrategy::kCornerPatches:
      return "corner-patches";
    case AuxStrategy::kRandomPatches:
      return "random-patches";
    case AuxStrategy::kShuffle:
      return "shuffle";
    case AuxStrategy::kReference:
      return "reference";
  }
  throw std::invalid_argument("unknown auxiliary strategy");
}

AuxStrategy aux_strategy_from_string(const std::string& name) {
  if (name == "annotation-background" || name == "annotation") {
    return AuxStrategy::kAnnotationBackground;
  }
  if (name == "corner-patches") return AuxStrategy::kCornerPatches;
  if (name == "random-patches") return AuxStrategy::kRandomPatches;
  if (name == "shuffle") return AuxStrategy::kShuffle;
  if (name == "reference") return AuxStrategy::kReference;
  throw std::invalid_argument("unknown auxiliary strategy: " + name);
}

AuxiliaryImageSet extract_background(const Image& x, const ForegroundMask& mask) {
  check_mask_matches(x, mask);
  const auto covered = box_union(x, mask);
  const std::size_t covered_count =
      static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 1));
  if (covered_count == covered.size()) {
    throw EmptyBackgroundError("foreground boxes cover the entire image");
  }
  Image out = x;
  for (int y = 0; y < x.height; ++y) {
    for (int xi = 0; xi < x.width; ++xi) {
      if (!covered[static_cast<std::size_t>(y) * x.width + xi]) continue;
      for (int c = 0; c < x.channels; ++c) out.at(y, xi, c) = 0.0;
    }
  }
  AuxiliaryImageSet set;
  set.images.push_back(std::move(out));
  set.strategy = AuxStrategy::kAnnotationBackground;
  return set;
}

Image extract_foreground(const Image& x, const ForegroundMask& mask) {
  check_mask_matches(x, mask);
  if (mask.foreground_count() == 0) {
    throw NoForegroundError("mask has no foreground pixels");
  }
  const auto covered = box_union(x, mask);
  Image out = x;
  for (int y = 0; y < x.height; ++y) {
    for (int xi = 0; xi < x.width; ++xi) {
      if (covered[static_cast<std::size_t>(y) * x.width + xi]) continue;
      for (int c = 0; c < x.channels; ++c) out.at(y, xi, c) = 0.0;
    }
  }
  return out;
}

std::vector<GridTile> grid_tiles(const Image& x, int grid) {
  if (grid < 1) throw std::invalid_argument("grid must be positive");
  if (x.height % grid != 0 || x.width % grid != 0) {
    throw std::invalid_argument("image dimensions must be divisible by " +
                                std::to_string(grid));
  }
  const int th = x.height / grid;
  const int tw = x.width / grid;
  std::vector<GridTile> tiles;
  tiles.reserve(static_cast<std::size_t>(grid) * grid);
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      Box box{r * th, c * tw, (r + 1) * th, (c + 1) * tw};
      tiles.push_back({box, crop(x, box)});
    }
  }
  return tiles;
}

AuxiliaryImageSet corner_patches(const Image& x) {
  auto tiles = grid_tiles(x, kPatchGrid);
  AuxiliaryImageSet set;
  set.strategy = AuxStrategy::kCornerPatches;
  const int g = kPatchGrid;
  for (int idx : {0, g - 1, g * (g - 1), g * g - 1}) {
    set.images.push_back(resize_nearest(tiles[idx].tile, x.height, x.width));
  }
  return set;
}

AuxiliaryImageSet random_patches(const Image& x, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_patches needs n >= 1");
  auto tiles = grid_tiles(x, kPatchGrid);
  Rng rng(derive_seed(seed, "random-patches"));
  AuxiliaryImageSet set;
  set.strategy = AuxStrategy::kRandomPatches;
  for (int i = 0; i < n; ++i) {
    const auto idx = rng.uniform_below(tiles.size());
    set.images.push_back(resize_nearest(tiles[idx].tile, x.height, x.width));
  }
  return set;
}

AuxiliaryImageSet shuffle_patches(const Image& x, std::uint64_t seed) {
  if (x.height % kShuffleTile != 0 || x.width % kShuffleTile != 0) {
    throw std::invalid_argument("image dimensions must be divisible by " +
                                std::to_string(kShuffleTile));
  }
  const int rows = x.height / kShuffleTile;
  const int cols = x.width / kShuffleTile;
  std::vector<int> order(static_cast<std::size_t>(rows) * cols);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "shuffle-patches"));
  rng.shuffle(order);

  Image out(x.height, x.width, x.channels);
  for (int t = 0; t < static_cast<int>(order.size()); ++t) {
    const int dst_y = (t / cols) * kShuffleTile;
    const int dst_x = (t % cols) * kShuffleTile;
    const int src_y = (order[t] / cols) * kShuffleTile;
    const int src_x = (order[t] % cols) * kShuffleTile;
    for (int dy = 0; dy < kShuffleTile; ++dy) {
      for (int dx = 0; dx < kShuffleTile; ++dx) {
        for (int c = 0; c < x.channels; ++c) {
          out.at(dst_y + dy, dst_x + dx, c) = x.at(src_y + dy, src_x + dx, c);
        }
      }
    }
  }
  AuxiliaryImageSet set;
  set.images.push_back(std::move(out));
  set.strategy = AuxStrategy::kShuffle;
  return set;
}

AuxiliaryImageSet select_reference_images(const ModelBackend& m, const Image& x,
                                          const std::vector<Image>& pool, int n) {
  if (pool.empty()) throw std::invalid_argument("reference pool is empty");
  if (n < 1 || n > static_cast<int>(pool.size())) {
    throw std::invalid_argument("reference count must be in [1, pool size]");
  }
  const Embedding anchor = m.encode_image(x);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(pool.size());
  for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
    scored.emplace_back(dot(m.encode_image(pool[i]).values, anchor.values), i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  AuxiliaryImageSet set;
  set.strategy = AuxStrategy::kReference;
  for (int i = 0; i < n; ++i) set.images.push_back(pool[scored[i].second]);
  return set;
}

}  // namespace seraser
