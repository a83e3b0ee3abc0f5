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

#include <map>
#include <utility>

#include <doctest.h>

#include "seraser/auxiliary.hpp"
#include "seraser/baselines.hpp"
#include "seraser/errors.hpp"
#include "seraser/toy_backend.hpp"

using namespace seraser;

namespace {

constexpr double kTau = 0.01;

const ToyWorld& shared_world() {
  static const ToyWorld world = build_toy_world(ToyWorldSpec{});
  return world;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("retained view count is ceil(rho * N) with exact integer handling") {
  CHECK(tpt_retained_view_count(0.1, 32) == 4);
  CHECK(tpt_retained_view_count(1.0, 8) == 8);
  CHECK(tpt_retained_view_count(0.3, 10) == 3);
  CHECK(tpt_retained_view_count(0.25, 4) == 1);
  CHECK(tpt_retained_view_count(0.51, 2) == 2);
}

TEST_CASE("tpt config defaults match the reference settings") {
  TptConfig config;
  CHECK(config.num_views == 32);
  CHECK(config.confidence_fraction == 0.1);
  CHECK(config.steps == 1);
  CHECK(tpt_retained_view_count(config.confidence_fraction, config.num_views) == 4);
  CHECK_NOTHROW(config.validate());
  config.confidence_fraction = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = TptConfig{};
  config.num_views = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("vanilla prediction is deterministic") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  const auto& sample = world.samples[0];
  const auto a = vanilla_predict(m, prompt, sample.image, kTau);
  const auto b = vanilla_predict(m, prompt, sample.image, kTau);
  CHECK(a == b);
}

TEST_CASE("vanilla follows the planted shortcut on minority groups") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  int minority_total = 0;
  int minority_correct = 0;
  for (const auto& sample : world.samples) {
    const bool minority =
        sample.group == "square_on_reef" || sample.group == "disc_on_dunes";
    if (!minority) continue;
    minority_total += 1;
    if (vanilla_predict(m, prompt, sample.image, kTau) == sample.label) {
      minority_correct += 1;
    }
  }
  CHECK(minority_total == 20);
  CHECK(minority_correct * 2 <= minority_total);  // at or below chance
}

TEST_CASE("mask_predict equals vanilla on the boxed foreground") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  const auto& sample = world.samples[0];
  CHECK(mask_predict(m, prompt, sample.image, sample.mask, kTau) ==
        vanilla_predict(m, prompt, extract_foreground(sample.image, sample.mask),
                        kTau));
}

TEST_CASE("mask_predict with a full mask is exactly vanilla") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  ForegroundMask full(64, 64);
  for (auto& b : full.bits) b = 1;
  for (int i = 0; i < 5; ++i) {
    const auto& sample = world.samples[i];
    CHECK(mask_predict(m, prompt, sample.image, full, kTau) ==
          vanilla_predict(m, prompt, sample.image, kTau));
  }
}

TEST_CASE("mask_predict recovers minority samples with exact masks") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  int correct = 0;
  int total = 0;
  for (const auto& sample : world.samples) {
    if (sample.group != "square_on_reef" && sample.group != "disc_on_dunes") {
      continue;
    }
    total += 1;
    correct +=
        mask_predict(m, prompt, sample.image, sample.mask, kTau) == sample.label;
  }
  CHECK(correct == total);
}

TEST_CASE("mask_predict rejects an empty mask") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  CHECK_THROWS_AS(
      mask_predict(m, prompt, world.samples[0].image, ForegroundMask(64, 64), kTau),
      NoForegroundError);
}

TEST_CASE("tpt_predict is deterministic and leaves the caller prompt alone") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  const auto hash_before = prompt_context_hash(prompt);
  const auto& sample = world.samples[3];

  TptConfig config;
  config.num_views = 8;  // keep the test quick
  const auto a = tpt_predict(m, prompt, sample.image, config, kTau, sample.id);
  const auto b = tpt_predict(m, prompt, sample.image, config, kTau, sample.id);
  CHECK(a == b);
  CHECK(prompt_context_hash(prompt) == hash_before);
  CHECK(m.fingerprint() == world.model->fingerprint());
}

TEST_CASE("tpt raises numeric-failure when the context diverges") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  TptConfig config;
  config.num_views = 4;
  config.learning_rate = 1e308;
  config.steps = 2;
  CHECK_THROWS_AS(
      tpt_predict(m, prompt, world.samples[0].image, config, 0.01, "diverge"),
      NumericFailureError);
}

TEST_CASE("vanilla is groupwise balanced without a planted shortcut") {
  ToyWorldSpec spec;
  spec.shortcut_strength = 0.0;
  const auto world = build_toy_world(spec);
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  std::map<std::string, std::pair<int, int>> groups;
  for (const auto& sample : world.samples) {
    auto& [correct, total] = groups[sample.group];
    total += 1;
    correct += vanilla_predict(m, prompt, sample.image, kTau) == sample.label;
  }
  REQUIRE(groups.size() == 4);
  for (const auto& [group, stats] : groups) {
    CHECK(stats.first == stats.second);  // every group at accuracy 1.0
  }
}

TEST_CASE("tpt with rho 1.0 and zero steps reduces to vanilla") {
  const auto& world = shared_world();
  const auto& m = *world.model;
  const auto prompt = m.default_prompt(0);
  TptConfig config;
  config.num_views = 4;
  config.confidence_fraction = 1.0;  // retains every view
  config.steps = 0;                  // no tuning: classification is vanilla
  for (int i = 0; i < 5; ++i) {
    const auto& sample = world.samples[i];
    CHECK(tpt_predict(m, prompt, sample.image, config, kTau, sample.id) ==
          vanilla_predict(m, prompt, sample.image, kTau));
  }
}

}  // TEST_SUITE
