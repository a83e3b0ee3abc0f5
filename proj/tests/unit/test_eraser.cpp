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

#include <doctest.h>

#include "seraser/baselines.hpp"
#include "seraser/eraser.hpp"
#include "seraser/errors.hpp"
#include "seraser/toy_backend.hpp"

using namespace seraser;

namespace {

constexpr double kTau = 0.01;

std::shared_ptr<const ToyBackend> shared_backend() {
  static auto backend = std::make_shared<ToyBackend>(ToyWorldSpec{});
  return backend;
}

PromptContext zero_prompt(const ToyBackend& backend) {
  auto prompt = backend.default_prompt(0);
  for (auto& v : prompt.context_vectors) v.assign(v.size(), 0.0);
  return prompt;
}

// A box mask; on a blank image the foreground crop is blank too.
ForegroundMask box_mask(int h, int w) {
  ForegroundMask mask(h, w);
  for (int y = 20; y < 40; ++y)
    for (int x = 20; x < 40; ++x) mask.set(y, x, true);
  return mask;
}

const ToySample& minority_sample() {
  static const ToyWorld world = build_toy_world(ToyWorldSpec{});
  for (const auto& sample : world.samples) {
    if (sample.group == "square_on_reef") return sample;
  }
  throw std::runtime_error("no minority sample found");
}

}  // namespace

TEST_SUITE("eraser") {

TEST_CASE("config invariants") {
  EraserConfig config;
  CHECK_NOTHROW(config.validate());
  config.steps = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = EraserConfig{};
  config.erase_weight = 0.0;
  config.keep_weight = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = EraserConfig{};
  config.strategies.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = EraserConfig{};
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("erase loss is zero when predictions are already uniform") {
  auto backend = shared_backend();
  // With an empty context every class token has the same norm and the same
  // anchor alignment, so a blank image scores all classes identically.
  AdaptationSession session(backend, zero_prompt(*backend), EraserConfig{}, kTau,
                            "t0");
  AuxiliaryImageSet aux;
  aux.images.push_back(Image(64, 64, 3, 0.0));
  CHECK(session.erase_loss(aux) <= 1e-12);
}

TEST_CASE("erase loss is the mean of per-image losses") {
  auto backend = shared_backend();
  const auto world = build_toy_world(ToyWorldSpec{});
  AdaptationSession session(backend, backend->default_prompt(0), EraserConfig{},
                            kTau, "t1");
  AuxiliaryImageSet one;
  one.images.push_back(world.samples[0].image);
  AuxiliaryImageSet two;
  two.images.push_back(world.samples[1].image);
  AuxiliaryImageSet both;
  both.images.push_back(world.samples[0].image);
  both.images.push_back(world.samples[1].image);

  const double a = session.erase_loss(one);
  const double b = session.erase_loss(two);
  const double ab = session.erase_loss(both);
  CHECK(ab == doctest::Approx((a + b) / 2.0).epsilon(1e-12));
  CHECK(a >= 0.0);
  CHECK(a <= std::log(2.0) + 1e-12);
}

TEST_CASE("a one-hot auxiliary prediction costs exactly ln K") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  // At temperature 1e-4 the similarity gap becomes hundreds of logits and
  // the auxiliary prediction rounds to one-hot.
  AdaptationSession session(backend, backend->default_prompt(0), EraserConfig{},
                            1e-4, sample.id);
  const auto aux = extract_background(sample.image, sample.mask);
  CHECK(session.erase_loss(aux) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("averaged-view entropy matches the direct-summation oracle") {
  // Four hand-specified view distributions; the frozen value is the entropy
  // of their mean, computed independently at high precision.
  const std::vector<std::vector<double>> views = {{0.7, 0.2, 0.1},
                                                  {0.6, 0.3, 0.1},
                                                  {0.8, 0.1, 0.1},
                                                  {0.5, 0.25, 0.25}};
  std::vector<double> mean(3, 0.0);
  for (const auto& v : views) {
    for (int k = 0; k < 3; ++k) mean[k] += v[k] / views.size();
  }
  const PredictionDistribution averaged(mean, {"a", "b", "c"});
  CHECK(entropy(averaged) == doctest::Approx(0.881949781974232).epsilon(1e-12));
}

TEST_CASE("keep loss equals the entropy of the mean view distribution") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  config.keep_views = 4;
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            sample.id);
  const double loss = session.keep_loss(sample.image, sample.mask);

  // Independent reconstruction through the public ops.
  const Image content = extract_foreground(sample.image, sample.mask);
  const auto view_seed = derive_seed(config.seed, "keep-views", sample.id);
  std::vector<double> mean(2, 0.0);
  for (int i = 0; i < config.keep_views; ++i) {
    const auto p = softmax_from_similarities(class_similarities(
        *backend, session.prompt(),
        backend->encode_image(augment_view(content, config.augment, view_seed, i)),
        kTau));
    for (int k = 0; k < 2; ++k) mean[k] += p.probs[k] / config.keep_views;
  }
  const double expected = entropy(PredictionDistribution(mean, backend->labels()));
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("keep loss with one identity view is the single-view entropy") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  config.keep_views = 1;
  config.augment = AugmentPolicy::identity();
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            sample.id);
  const double loss = session.keep_loss(sample.image, std::nullopt);
  const double expected = entropy(softmax_from_similarities(class_similarities(
      *backend, session.prompt(), backend->encode_image(sample.image), kTau)));
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adaptation decreases the erase loss on a planted-shortcut sample") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            sample.id);
  const auto aux = extract_background(sample.image, sample.mask);
  const double before = session.erase_loss(aux);
  AdaptationDiagnostics diagnostics;
  session.adapt_prompt(sample.image, sample.mask, {aux}, &diagnostics);
  const double after = session.erase_loss(aux);
  CHECK(after < before);
  CHECK(diagnostics.initial_loss > diagnostics.final_loss);
  CHECK(diagnostics.steps == config.steps);
  CHECK(static_cast<int>(diagnostics.trace.size()) == config.steps + 1);
  CHECK(diagnostics.strategies_used ==
        std::vector<std::string>{"annotation-background"});
}

TEST_CASE("loss trace is monotone non-increasing at a small learning rate") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  config.learning_rate = 1e-3;
  config.steps = 8;
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            sample.id);
  AdaptationDiagnostics diagnostics;
  session.adapt_prompt(sample.image, sample.mask,
                       {extract_background(sample.image, sample.mask)},
                       &diagnostics);
  for (std::size_t i = 1; i < diagnostics.trace.size(); ++i) {
    CHECK(diagnostics.trace[i].total <= diagnostics.trace[i - 1].total + 1e-12);
  }
  for (const auto& step : diagnostics.trace) {
    CHECK(std::isfinite(step.total));
  }
}

TEST_CASE("soft constraint: uniform auxiliaries and flat keep views leave the prompt") {
  auto backend = shared_backend();
  const Image blank(64, 64, 3, 0.0);
  EraserConfig config;
  config.augment = AugmentPolicy::identity();
  AdaptationSession session(backend, zero_prompt(*backend), config, kTau, "soft");

  // Blank content everywhere: every prediction involved is uniform within
  // 1e-6, and the entropy gradient vanishes at the uniform point.
  const auto aux = extract_background(blank, box_mask(64, 64));
  const auto p = softmax_from_similarities(class_similarities(
      *backend, session.prompt(), backend->encode_image(aux.images[0]), kTau));
  for (double v : p.probs) CHECK(std::abs(v - 0.5) <= 1e-6);

  const auto before = session.prompt();
  session.adapt_prompt(blank, box_mask(64, 64), {aux}, nullptr);
  const auto& after = session.prompt();
  for (std::size_t i = 0; i < before.context_vectors.size(); ++i) {
    for (std::size_t e = 0; e < before.context_vectors[i].size(); ++e) {
      CHECK(std::abs(after.context_vectors[i][e] - before.context_vectors[i][e]) <=
            1e-9);
    }
  }
}

TEST_CASE("lambda_e zero with a one-hot-confident model leaves the prompt") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  config.erase_weight = 0.0;
  config.keep_weight = 1.0;
  config.augment = AugmentPolicy::identity();
  config.keep_views = 2;
  // Temperature 1e-4 turns the ~0.04 similarity gap into hundreds of
  // logits: the view distribution rounds to one-hot and the entropy
  // gradient vanishes.
  AdaptationSession session(backend, backend->default_prompt(0), config, 1e-4,
                            sample.id);
  // One-hot views make the keep loss itself vanish.
  CHECK(session.keep_loss(sample.image, sample.mask) <= 1e-9);

  const auto before = session.prompt();
  session.adapt_prompt(sample.image, sample.mask, {}, nullptr);
  const auto& after = session.prompt();
  for (std::size_t i = 0; i < before.context_vectors.size(); ++i) {
    for (std::size_t e = 0; e < before.context_vectors[i].size(); ++e) {
      CHECK(std::abs(after.context_vectors[i][e] - before.context_vectors[i][e]) <=
            1e-9);
    }
  }

  // Zero-effect setup end to end: the adapted prediction equals vanilla.
  AdaptationSession full(backend, backend->default_prompt(0), config, 1e-4,
                         sample.id);
  const auto result =
      full.predict_with_adaptation(SampleInput{sample.image, sample.mask, {}});
  CHECK(result.predicted_label ==
        vanilla_predict(*backend, backend->default_prompt(0), sample.image, 1e-4));
}

TEST_CASE("predict_with_adaptation flips a minority sample and resets state") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  const auto initial = backend->default_prompt(0);
  const auto fingerprint_before = backend->fingerprint();
  const auto tokens_before = class_tokens_hash(initial);

  AdaptationSession session(backend, initial, EraserConfig{}, kTau, sample.id);
  const auto result = session.predict_with_adaptation(
      SampleInput{sample.image, sample.mask, {}});

  // Vanilla gets this sample wrong (the texture points at the other class);
  // the adapted prompt recovers the true label.
  CHECK(result.predicted_label == sample.label);
  CHECK(result.diagnostics.final_loss < result.diagnostics.initial_loss);

  // Session and model state: prompt reset, weights and tokens untouched.
  CHECK(prompt_context_hash(session.prompt()) == prompt_context_hash(initial));
  CHECK(backend->fingerprint() == fingerprint_before);
  CHECK(class_tokens_hash(session.prompt()) == tokens_before);

  // Re-running the same sample reproduces the prediction bit for bit.
  const auto again = session.predict_with_adaptation(
      SampleInput{sample.image, sample.mask, {}});
  CHECK(again.predicted_label == result.predicted_label);
  CHECK(again.distribution.probs == result.distribution.probs);
}

TEST_CASE("annotation strategy without a mask names the missing input") {
  auto backend = shared_backend();
  AdaptationSession session(backend, backend->default_prompt(0), EraserConfig{},
                            kTau, "nomask");
  const auto& sample = minority_sample();
  CHECK_THROWS_WITH_AS(
      session.predict_with_adaptation(SampleInput{sample.image, std::nullopt, {}}),
      doctest::Contains("mask"), StrategyUnavailableError);
}

TEST_CASE("reference strategy without a pool names the missing input") {
  auto backend = shared_backend();
  EraserConfig config;
  config.strategies = {AuxStrategy::kReference};
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            "nopool");
  const auto& sample = minority_sample();
  CHECK_THROWS_WITH_AS(
      session.predict_with_adaptation(SampleInput{sample.image, sample.mask, {}}),
      doctest::Contains("pool"), StrategyUnavailableError);
}

TEST_CASE("multiple strategies contribute a union of auxiliary images") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  config.strategies = {AuxStrategy::kShuffle, AuxStrategy::kCornerPatches,
                       AuxStrategy::kAnnotationBackground};
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            sample.id);
  const auto result = session.predict_with_adaptation(
      SampleInput{sample.image, sample.mask, {}});
  // Canonical strategy order, independent of the config listing order.
  CHECK(result.diagnostics.strategies_used ==
        std::vector<std::string>{"annotation-background", "corner-patches",
                                 "shuffle"});
}

TEST_CASE("a runaway learning rate raises numeric-failure with a step index") {
  auto backend = shared_backend();
  const auto& sample = minority_sample();
  EraserConfig config;
  config.learning_rate = 1e308;
  config.steps = 3;
  AdaptationSession session(backend, backend->default_prompt(0), config, kTau,
                            sample.id);
  try {
    session.adapt_prompt(sample.image, sample.mask,
                         {extract_background(sample.image, sample.mask)}, nullptr);
    FAIL("expected NumericFailureError");
  } catch (const NumericFailureError& e) {
    CHECK(e.step() >= 1);
    CHECK(e.step() <= 3);
  }
}

}  // TEST_SUITE
