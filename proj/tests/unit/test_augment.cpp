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

#include <stdexcept>

#include <doctest.h>

#include "seraser/augment.hpp"
#include "seraser/rng.hpp"

using namespace seraser;

namespace {

Image gradient_image() {
  Image img(16, 16, 3);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      img.at(y, x, 0) = y / 15.0;
      img.at(y, x, 1) = x / 15.0;
      img.at(y, x, 2) = 0.5;
    }
  }
  return img;
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("views are deterministic in (policy, seed, view index)") {
  const Image img = gradient_image();
  AugmentPolicy policy;
  const Image a = augment_view(img, policy, 9, 3);
  const Image b = augment_view(img, policy, 9, 3);
  CHECK(a == b);
  const Image other_view = augment_view(img, policy, 9, 4);
  const Image other_seed = augment_view(img, policy, 10, 3);
  CHECK(!(a == other_view));
  CHECK(!(a == other_seed));
}

TEST_CASE("an empty op list yields identity views") {
  const Image img = gradient_image();
  const auto policy = AugmentPolicy::identity();
  for (int view = 0; view < 4; ++view) {
    CHECK(augment_view(img, policy, 1, view) == img);
  }
}

TEST_CASE("augmented pixels stay in range") {
  const Image img = gradient_image();
  AugmentPolicy policy;
  policy.magnitude = 30;
  for (int view = 0; view < 16; ++view) {
    const Image out = augment_view(img, policy, 5, view);
    CHECK_NOTHROW(out.validate());
    CHECK(out.height == img.height);
    CHECK(out.width == img.width);
  }
}

TEST_CASE("a flip-only policy is a horizontal mirror") {
  const Image img = gradient_image();
  AugmentPolicy policy{1, 0, {AugmentOp::kFlip}};
  const Image out = augment_view(img, policy, 0, 0);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      for (int c = 0; c < 3; ++c) {
        CHECK(out.at(y, x, c) == img.at(y, 15 - x, c));
      }
    }
  }
  // Two flips cancel.
  AugmentPolicy twice{2, 0, {AugmentOp::kFlip}};
  CHECK(augment_view(img, twice, 0, 0) == img);
}

TEST_CASE("magnitude zero makes parametric ops no-ops") {
  const Image img = gradient_image();
  for (auto op : {AugmentOp::kTranslate, AugmentOp::kRotate,
                  AugmentOp::kColorJitter, AugmentOp::kCutout}) {
    AugmentPolicy policy{3, 0, {op}};
    CHECK(augment_view(img, policy, 2, 0) == img);
  }
}

TEST_CASE("policy validation enforces the magnitude range") {
  AugmentPolicy policy;
  policy.magnitude = 31;
  CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
  policy.magnitude = -1;
  CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
  policy.magnitude = 9;
  policy.ops_per_view = -1;
  CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
}

TEST_CASE("op names round trip") {
  for (auto op : {AugmentOp::kFlip, AugmentOp::kTranslate, AugmentOp::kRotate,
                  AugmentOp::kColorJitter, AugmentOp::kCutout}) {
    CHECK(augment_op_from_string(to_string(op)) == op);
  }
  CHECK_THROWS_AS(augment_op_from_string("sharpen"), std::invalid_argument);
}

}  // TEST_SUITE
