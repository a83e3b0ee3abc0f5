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

#ifndef SERASER_AUXILIARY_HPP_
#define SERASER_AUXILIARY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "seraser/image.hpp"
#include "seraser/model.hpp"

namespace seraser {

enum class AuxStrategy {
  kAnnotationBackground,
  kCornerPatches,
  kRandomPatches,
  kShuffle,
  kReference,
};

std::string to_string(AuxStrategy strategy);
AuxStrategy aux_strategy_from_string(const std::string& name);

// Images carrying the features to be erased, tagged by how they were built.
struct AuxiliaryImageSet {
  std::vector<Image> images;
  AuxStrategy strategy = AuxStrategy::kAnnotationBackground;
  std::string source_id;  // empty for the reference strategy
};

// Returns x with every pixel inside the union of foreground bounding boxes
// (one box per 8-connected mask region) set to 0. A mask with no foreground
// returns x unchanged; boxes covering the whole canvas raise
// EmptyBackgroundError.
AuxiliaryImageSet extract_background(const Image& x, const ForegroundMask& mask);

// Complement of extract_background over the same box union: keeps the boxed
// foreground in place, zeroes everything else. Empty mask raises
// NoForegroundError.
Image extract_foreground(const Image& x, const ForegroundMask& mask);

// All tiles of the g x g grid over x, row-major, with their source boxes.
struct GridTile {
  Box box;
  Image tile;
};
std::vector<GridTile> grid_tiles(const Image& x, int grid);

// Four corner tiles of the 8x8 grid, each nearest-neighbor upsampled back to
// the input size. Order: top-left, top-right, bottom-left, bottom-right.
AuxiliaryImageSet corner_patches(const Image& x);

// n tiles drawn uniformly with replacement from the 8x8 grid, upsampled to
// the input size.
AuxiliaryImageSet random_patches(const Image& x, int n, std::uint64_t seed);

// Scrambles x by a seeded uniform permutation of its 4x4-pixel tiles; the
// pixel multiset is preserved exactly.
AuxiliaryImageSet shuffle_patches(const Image& x, std::uint64_t seed);

// The n pool images most similar to x by embedding cosine, descending, ties
// by pool index. The pool must hold out-of-task images; that is the caller's
// contract and is not checkable here.
AuxiliaryImageSet select_reference_images(const ModelBackend& m, const Image& x,
                                          const std::vector<Image>& pool, int n);

}  // namespace seraser

#endif  // SERASER_AUXILIARY_HPP_
