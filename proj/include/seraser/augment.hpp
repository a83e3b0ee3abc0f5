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

#ifndef SERASER_AUGMENT_HPP_
#define SERASER_AUGMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "seraser/image.hpp"

namespace seraser {

enum class AugmentOp { kFlip, kTranslate, kRotate, kColorJitter, kCutout };

std::string to_string(AugmentOp op);
AugmentOp augment_op_from_string(const std::string& name);

// Deterministic parametric augmentation: (policy, seed, view index) fully
// determines the transform. An empty op list gives identity views.
struct AugmentPolicy {
  int ops_per_view = 2;
  int magnitude = 9;  // in [0, 30]
  std::vector<AugmentOp> allowed_ops = {AugmentOp::kFlip, AugmentOp::kTranslate,
                                        AugmentOp::kRotate, AugmentOp::kColorJitter,
                                        AugmentOp::kCutout};

  void validate() const;
  static AugmentPolicy identity() { return {0, 0, {}}; }
};

Image augment_view(const Image& x, const AugmentPolicy& policy,
                   std::uint64_t seed, int view_index);

}  // namespace seraser

#endif  // SERASER_AUGMENT_HPP_
