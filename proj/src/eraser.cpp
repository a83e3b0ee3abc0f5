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

#include "seraser/eraser.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "seraser/errors.hpp"
#include "seraser/rng.hpp"

namespace seraser {

namespace {

// Strategies are applied in this fixed order regardless of config order, so
// the auxiliary union is reproducible.
constexpr AuxStrategy kCanonicalOrder[] = {
    AuxStrategy::kAnnotationBackground, AuxStrategy::kCornerPatches,
    AuxStrategy::kRandomPatches, AuxStrategy::kShuffle, AuxStrategy::kReference};

}  // namespace

void EraserConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("eraser steps must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (erase_weight < 0.0 || keep_weight < 0.0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
  if (erase_weight + keep_weight <= 0.0) {
    throw std::invalid_argument("erase_weight + keep_weight must be positive");
  }
  if (keep_views < 1) throw std::invalid_argument("keep_views must be >= 1");
  if (strategies.empty()) {
    throw std::invalid_argument("at least one auxiliary strategy is required");
  }
  if (random_patch_count < 1) {
    throw std::invalid_argument("random_patch_count must be >= 1");
  }
  if (reference_count < 1) {
    throw std::invalid_argument("reference_count must be >= 1");
  }
  augment.validate();
}

AdaptationSession::AdaptationSession(ModelHandle model,
                                     PromptContext initial_prompt,
                                     EraserConfig config, double temperature,
                                     std::string sample_id)
    : model_(std::move(model)),
      initial_prompt_(std::move(initial_prompt)),
      prompt_(initial_prompt_),
      config_(std::move(config)),
      temperature_(temperature),
      sample_id_(std::move(sample_id)) {
  config_.validate();
  if (!(temperature_ > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
}

double AdaptationSession::erase_loss(const AuxiliaryImageSet& aux) const {
  if (aux.images.empty()) {
    throw std::invalid_argument("auxiliary image set is empty");
  }
  LossTerm term;
  term.kind = LossTerm::Kind::kKlToUniform;
  for (const Image& img : aux.images) {
    term.image_embeddings.push_back(model_->encode_image(img));
  }
  PromptObjective objective;
  objective.temperature = temperature_;
  objective.terms.push_back(std::move(term));
  return objective_value(*model_, prompt_, objective);
}

std::vector<Embedding> AdaptationSession::keep_view_embeddings(
    const Image& x, const std::optional<ForegroundMask>& mask) const {
  const Image content = mask.has_value() ? extract_foreground(x, *mask) : x;
  const std::uint64_t view_seed =
      derive_seed(config_.seed, "keep-views", sample_id_);
  std::vector<Embedding> views;
  views.reserve(config_.keep_views);
  for (int i = 0; i < config_.keep_views; ++i) {
    views.push_back(
        model_->encode_image(augment_view(content, config_.augment, view_seed, i)));
  }
  return views;
}

double AdaptationSession::keep_loss(
    const Image& x, const std::optional<ForegroundMask>& mask) const {
  LossTerm term;
  term.kind = LossTerm::Kind::kEntropyOfMean;
  term.image_embeddings = keep_view_embeddings(x, mask);
  PromptObjective objective;
  objective.temperature = temperature_;
  objective.terms.push_back(std::move(term));
  return objective_value(*model_, prompt_, objective);
}

std::vector<AuxiliaryImageSet> AdaptationSession::build_auxiliary_sets(
    const SampleInput& input) const {
  std::vector<AuxiliaryImageSet> sets;
  for (AuxStrategy strategy : kCanonicalOrder) {
    if (std::find(config_.strategies.begin(), config_.strategies.end(),
                  strategy) == config_.strategies.end()) {
      continue;
    }
    switch (strategy) {
      case AuxStrategy::kAnnotationBackground:
        if (!input.mask.has_value()) {
          throw StrategyUnavailableError(
              "annotation-background strategy needs a foreground mask for sample " +
              sample_id_);
        }
        sets.push_back(extract_background(input.image, *input.mask));
        break;
      case AuxStrategy::kCornerPatches:
        sets.push_back(corner_patches(input.image));
        break;
      case AuxStrategy::kRandomPatches:
        sets.push_back(random_patches(
            input.image, config_.random_patch_count,
            derive_seed(config_.seed, "random-patches", sample_id_)));
        break;
      case AuxStrategy::kShuffle:
        sets.push_back(shuffle_patches(
            input.image, derive_seed(config_.seed, "shuffle", sample_id_)));
        break;
      case AuxStrategy::kReference:
        if (input.reference_pool.empty()) {
          throw StrategyUnavailableError(
              "reference strategy needs a non-empty reference pool for sample " +
              sample_id_);
        }
        sets.push_back(select_reference_images(*model_, input.image,
                                               input.reference_pool,
                                               config_.reference_count));
        break;
    }
    sets.back().source_id =
        strategy == AuxStrategy::kReference ? "" : sample_id_;
  }
  return sets;
}

PromptContext AdaptationSession::adapt_prompt(
    const Image& x, const std::optional<ForegroundMask>& mask,
    const std::vector<AuxiliaryImageSet>& aux_sets,
    AdaptationDiagnostics* diagnostics) {
  PromptObjective objective;
  objective.temperature = temperature_;

  LossTerm erase_term;
  erase_term.kind = LossTerm::Kind::kKlToUniform;
  erase_term.weight = config_.erase_weight;
  for (const auto& set : aux_sets) {
    for (const Image& img : set.images) {
      erase_term.image_embeddings.push_back(model_->encode_image(img));
    }
  }
  if (config_.erase_weight > 0.0) {
    if (erase_term.image_embeddings.empty()) {
      throw std::invalid_argument("no auxiliary images for the erase loss");
    }
    objective.terms.push_back(std::move(erase_term));
  }
  if (config_.keep_weight > 0.0) {
    LossTerm keep_term;
    keep_term.kind = LossTerm::Kind::kEntropyOfMean;
    keep_term.weight = config_.keep_weight;
    keep_term.image_embeddings = keep_view_embeddings(x, mask);
    objective.terms.push_back(std::move(keep_term));
  }

  // Splits the recorded trace into the two raw terms for diagnostics.
  auto eval_parts = [&]() {
    StepRecord record;
    for (const auto& term : objective.terms) {
      PromptObjective single;
      single.temperature = temperature_;
      single.terms.push_back(term);
      single.terms.back().weight = 1.0;
      const double value = objective_value(*model_, prompt_, single);
      if (term.kind == LossTerm::Kind::kKlToUniform) {
        record.erase = value;
        record.total += config_.erase_weight * value;
      } else {
        record.keep = value;
        record.total += config_.keep_weight * value;
      }
    }
    return record;
  };

  AdaptationDiagnostics local;
  local.trace.push_back(eval_parts());
  local.initial_loss = local.trace.front().total;
  if (!std::isfinite(local.initial_loss)) {
    throw NumericFailureError("non-finite adaptation loss", 0);
  }
  for (int step = 1; step <= config_.steps; ++step) {
    // Inside the loop any evaluation failure is numeric: the inputs were
    // already validated, only the context values have changed.
    try {
      const auto gradients = model_->prompt_gradient(prompt_, objective);
      for (std::size_t i = 0; i < prompt_.context_vectors.size(); ++i) {
        axpy(-config_.learning_rate, gradients[i], prompt_.context_vectors[i]);
      }
      if (!prompt_is_finite(prompt_)) {
        throw NumericFailureError("context vectors diverged", step);
      }
      local.trace.push_back(eval_parts());
    } catch (const NumericFailureError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericFailureError(std::string("adaptation state became "
                                            "non-evaluable: ") +
                                    e.what(),
                                step);
    }
    if (!std::isfinite(local.trace.back().total)) {
      throw NumericFailureError("non-finite adaptation loss", step);
    }
  }
  local.final_loss = local.trace.back().total;
  local.steps = config_.steps;
  for (const auto& set : aux_sets) {
    local.strategies_used.push_back(to_string(set.strategy));
  }
  if (diagnostics != nullptr) *diagnostics = local;
  return prompt_;
}

PredictionResult AdaptationSession::predict_with_adaptation(
    const SampleInput& input) {
  reset();
  const auto aux_sets = build_auxiliary_sets(input);
  AdaptationDiagnostics diagnostics;
  adapt_prompt(input.image, input.mask, aux_sets, &diagnostics);

  auto distribution = softmax_from_similarities(class_similarities(
      *model_, prompt_, model_->encode_image(input.image), temperature_));
  PredictionResult result{argmax_predict(distribution), std::move(distribution),
                          std::move(diagnostics)};
  reset();
  return result;
}

}  // namespace seraser
