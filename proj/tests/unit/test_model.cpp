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

#include <cmath>
#include <map>

#include <doctest.h>

#include "seraser/gradcheck.hpp"
#include "seraser/image.hpp"
#include "seraser/toy_backend.hpp"

using namespace seraser;

namespace {

ToyWorldSpec small_spec(std::uint64_t seed = 0) {
  ToyWorldSpec spec;
  spec.seed = seed;
  return spec;
}

Image sample_image(const ToyBackend& backend, int k, int b, int oy, int ox,
                   std::uint64_t seed = 1) {
  Rng rng(seed);
  return backend.compose_image(k, b, oy, ox, 0.015, rng);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("encode_image is bitwise deterministic") {
  const ToyBackend backend(small_spec());
  const Image img = sample_image(backend, 0, 1, 10, 12);
  const auto a = backend.encode_image(img);
  const auto b = backend.encode_image(img);
  CHECK(a.values == b.values);
}

TEST_CASE("all-zero image maps to the bias embedding") {
  // The feature map is linear, so a black image leaves only the encoder
  // bias; the bias does not depend on the planted shortcut strength.
  auto spec_a = small_spec();
  auto spec_b = small_spec();
  spec_b.shortcut_strength = 0.0;
  const ToyBackend with_shortcut(spec_a);
  const ToyBackend without_shortcut(spec_b);
  const Image zero(64, 64, 3, 0.0);
  const auto za = with_shortcut.encode_image(zero);
  const auto zb = without_shortcut.encode_image(zero);
  CHECK(za.values == zb.values);
  CHECK(std::abs(norm(za.values) - 1.0) <= 1e-9);
}

TEST_CASE("embeddings are unit-norm within 1e-9") {
  const ToyBackend backend(small_spec());
  const auto prompt = backend.default_prompt(3);
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(norm(backend.encode_text(prompt, k).values) - 1.0) <= 1e-9);
  }
  CHECK(std::abs(norm(backend.encode_background_text(prompt).values) - 1.0) <= 1e-9);
  for (int trial = 0; trial < 5; ++trial) {
    const Image img = sample_image(backend, trial % 2, (trial + 1) % 2, 8, 20,
                                   trial + 10);
    CHECK(std::abs(norm(backend.encode_image(img).values) - 1.0) <= 1e-9);
  }
}

TEST_CASE("same glyph on different backgrounds embeds strictly apart") {
  const ToyBackend backend(small_spec());
  Rng rng_a(7);
  Rng rng_b(7);
  const Image on_bg0 = backend.compose_image(0, 0, 16, 16, 0.0, rng_a);
  const Image on_bg1 = backend.compose_image(0, 1, 16, 16, 0.0, rng_b);
  const double cosine = dot(backend.encode_image(on_bg0).values,
                            backend.encode_image(on_bg1).values);
  CHECK(cosine < 1.0);
  CHECK(cosine > 0.9);  // anchor keeps everything in a narrow cone
}

TEST_CASE("encode_image rejects wrong dimensions") {
  const ToyBackend backend(small_spec());
  CHECK_THROWS_AS(backend.encode_image(Image(32, 64, 3)), std::invalid_argument);
  CHECK_THROWS_AS(backend.encode_image(Image(64, 64, 1)), std::invalid_argument);
}

TEST_CASE("encode_text is deterministic and validates the class index") {
  const ToyBackend backend(small_spec());
  const auto prompt = backend.default_prompt(11);
  CHECK(backend.encode_text(prompt, 1).values ==
        backend.encode_text(prompt, 1).values);
  CHECK_THROWS_AS(backend.encode_text(prompt, -1), std::invalid_argument);
  CHECK_THROWS_AS(backend.encode_text(prompt, 2), std::invalid_argument);
}

TEST_CASE("context perturbation shifts the preactivation by W_txt * delta / M") {
  const ToyBackend backend(small_spec());
  const auto prompt = backend.default_prompt(5);
  const auto base = backend.text_preactivation(prompt, 0);

  Rng rng(99);
  Vec delta(ToyBackend::kContextDim);
  for (double& v : delta) v = 0.1 * rng.normal();

  // Measure W_txt * delta through the encoder itself: a context made of
  // copies of delta minus the zero context isolates the linear map.
  auto all_delta = prompt;
  for (auto& v : all_delta.context_vectors) v = delta;
  auto zero_ctx = prompt;
  for (auto& v : zero_ctx.context_vectors) v.assign(v.size(), 0.0);
  const auto with_delta = backend.text_preactivation(all_delta, 0);
  const auto with_zero = backend.text_preactivation(zero_ctx, 0);

  // Perturbing v_1 alone must move the preactivation by W_txt * delta / M.
  auto perturbed = prompt;
  axpy(1.0, delta, perturbed.context_vectors[0]);
  const auto moved = backend.text_preactivation(perturbed, 0);
  const double m = static_cast<double>(prompt.context_vectors.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double expected = (with_delta[i] - with_zero[i]) / m;
    CHECK(std::abs((moved[i] - base[i]) - expected) <= 1e-12);
  }
}

TEST_CASE("default prompts are unit context vectors, reproducible by seed") {
  const ToyBackend backend(small_spec());
  const auto a = backend.default_prompt(42);
  const auto b = backend.default_prompt(42);
  const auto c = backend.default_prompt(43);
  CHECK(prompt_context_hash(a) == prompt_context_hash(b));
  CHECK(prompt_context_hash(a) != prompt_context_hash(c));
  for (const auto& v : a.context_vectors) {
    CHECK(std::abs(norm(v) - 1.0) <= 1e-12);
  }
  CHECK(a.context_vectors.size() == ToyBackend::kContextLen);
}

TEST_CASE("constant objective has zero gradient") {
  const ToyBackend backend(small_spec());
  const auto prompt = backend.default_prompt(1);
  PromptObjective objective;  // no terms: constant in the prompt
  const auto grads = backend.prompt_gradient(prompt, objective);
  REQUIRE(grads.size() == prompt.context_vectors.size());
  for (const auto& g : grads) {
    for (double v : g) CHECK(v == 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  const ToyBackend backend(small_spec());
  const auto result = run_gradient_check(backend, 5, 7);
  CHECK(result.max_rel_error <= 1e-5);
}

TEST_CASE("the corrupted-gradient hook breaks the finite-difference check") {
  const ToyBackend backend(small_spec());
  const auto corrupted = backend.with_corrupted_gradients();
  const auto result = run_gradient_check(*corrupted, 3, 7);
  CHECK(result.max_rel_error > 1e-5);
}

TEST_CASE("gradient is invariant to auxiliary image order") {
  const ToyBackend backend(small_spec());
  const auto prompt = backend.default_prompt(2);
  const auto img_a = backend.encode_image(sample_image(backend, 0, 1, 6, 6, 3));
  const auto img_b = backend.encode_image(sample_image(backend, 1, 0, 20, 14, 4));

  PromptObjective fwd;
  fwd.temperature = 0.01;
  fwd.terms.push_back({LossTerm::Kind::kKlToUniform, {img_a, img_b}, 1.0});
  PromptObjective rev;
  rev.temperature = 0.01;
  rev.terms.push_back({LossTerm::Kind::kKlToUniform, {img_b, img_a}, 1.0});

  const auto ga = backend.prompt_gradient(prompt, fwd);
  const auto gb = backend.prompt_gradient(prompt, rev);
  for (std::size_t i = 0; i < ga.size(); ++i) {
    for (std::size_t e = 0; e < ga[i].size(); ++e) {
      CHECK(ga[i][e] == doctest::Approx(gb[i][e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("fingerprint is stable for a spec and moves with the seed") {
  const ToyBackend a(small_spec(0));
  const ToyBackend b(small_spec(0));
  const ToyBackend c(small_spec(1));
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("toy world construction is deterministic") {
  const auto w1 = build_toy_world(small_spec());
  const auto w2 = build_toy_world(small_spec());
  REQUIRE(w1.samples.size() == w2.samples.size());
  CHECK(w1.samples.size() == 400);
  for (std::size_t i = 0; i < w1.samples.size(); ++i) {
    CHECK(w1.samples[i].id == w2.samples[i].id);
    CHECK(w1.samples[i].group == w2.samples[i].group);
    CHECK(image_hash(w1.samples[i].image) == image_hash(w2.samples[i].image));
    CHECK(w1.samples[i].mask.bits == w2.samples[i].mask.bits);
  }
}

TEST_CASE("toy world honors the group correlation ratio") {
  const auto world = build_toy_world(small_spec());
  std::map<std::string, int> counts;
  for (const auto& sample : world.samples) counts[sample.group] += 1;
  REQUIRE(counts.size() == 4);
  CHECK(counts.at("square_on_dunes") == 190);
  CHECK(counts.at("square_on_reef") == 10);
  CHECK(counts.at("disc_on_reef") == 190);
  CHECK(counts.at("disc_on_dunes") == 10);
}

TEST_CASE("toy masks exactly cover the glyph pixels") {
  const ToyBackend backend(small_spec());
  // The square glyph fills its whole box; the disc strictly fewer pixels.
  const auto square_mask = backend.glyph_mask(0, 10, 14);
  CHECK(square_mask.foreground_count() == 32 * 32);
  const auto disc_mask = backend.glyph_mask(1, 10, 14);
  CHECK(disc_mask.foreground_count() < 32 * 32);
  CHECK(disc_mask.foreground_count() > 0);
  // Composited pixels inside the mask use the glyph pattern: recomposing on
  // another background leaves masked pixels identical.
  Rng rng_a(5);
  Rng rng_b(5);
  const Image on_bg0 = backend.compose_image(1, 0, 10, 14, 0.0, rng_a);
  const Image on_bg1 = backend.compose_image(1, 1, 10, 14, 0.0, rng_b);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!disc_mask.at(y, x)) continue;
      for (int c = 0; c < 3; ++c) {
        CHECK(on_bg0.at(y, x, c) == on_bg1.at(y, x, c));
      }
    }
  }
}

TEST_CASE("world spec validation") {
  auto spec = small_spec();
  spec.num_classes = 1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.group_correlation = 0.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.shortcut_strength = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.glyph_patterns = {0, 0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.class_names = {"a", "a"};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

}  // TEST_SUITE
