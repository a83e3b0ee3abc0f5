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

#include "seraser/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "seraser/auxiliary.hpp"
#include "seraser/errors.hpp"
#include "seraser/rng.hpp"

namespace seraser {

int tpt_retained_view_count(double rho, int num_views) {
  return static_cast<int>(std::ceil(rho * num_views - 1e-9));
}

void TptConfig::validate() const {
  if (num_views < 1) throw std::invalid_argument("num_views must be >= 1");
  if (!(confidence_fraction > 0.0 && confidence_fraction <= 1.0)) {
    throw std::invalid_argument("confidence_fraction must be in (0, 1]");
  }
  if (tpt_retained_view_count(confidence_fraction, num_views) < 1) {
    throw std::invalid_argument("confidence selection would retain zero views");
  }
  if (steps < 0) throw std::invalid_argument("tpt steps must be >= 0");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  augment.validate();
}

std::string vanilla_predict(const ModelBackend& m, const PromptContext& prompt,
                            const Image& x, double temperature) {
  return argmax_predict(softmax_from_similarities(
      class_similarities(m, prompt, m.encode_image(x), temperature)));
}

std::string mask_predict(const ModelBackend& m, const PromptContext& prompt,
                         const Image& x, const ForegroundMask& mask,
                         double temperature) {
  return vanilla_predict(m, prompt, extract_foreground(x, mask), temperature);
}

std::string tpt_predict(const ModelBackend& m, const PromptContext& prompt,
                        const Image& x, const TptConfig& cfg, double temperature,
                        const std::string& sample_id) {
  cfg.validate();
  const std::uint64_t view_seed = derive_seed(cfg.seed, "tpt-views", sample_id);

  std::vector<Embedding> views;
  views.reserve(cfg.num_views);
  views.push_back(m.encode_image(x));  // view 0 is the identity view
  for (int i = 1; i < cfg.num_views; ++i) {
    views.push_back(m.encode_image(augment_view(x, cfg.augment, view_seed, i)));
  }

  // Confidence selection on the initial prompt: keep the lowest-entropy
  // views, ties resolved by view index.
  std::vector<double> entropies(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    entropies[i] = entropy(softmax_from_similarities(
        class_similarities(m, prompt, views[i], temperature)));
  }
  std::vector<int> order(views.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return entropies[a] < entropies[b];
  });
  const int retained = tpt_retained_view_count(cfg.confidence_fraction, cfg.num_views);

  LossTerm term;
  term.kind = LossTerm::Kind::kEntropyOfMean;
  for (int i = 0; i < retained; ++i) {
    term.image_embeddings.push_back(views[order[i]]);
  }
  PromptObjective objective;
  objective.temperature = temperature;
  objective.terms.push_back(std::move(term));

  PromptContext tuned = prompt;
  for (int step = 1; step <= cfg.steps; ++step) {
    try {
      if (!std::isfinite(objective_value(m, tuned, objective))) {
        throw NumericFailureError("non-finite TPT loss", step - 1);
      }
      const auto gradients = m.prompt_gradient(tuned, objective);
      for (std::size_t i = 0; i < tuned.context_vectors.size(); ++i) {
        axpy(-cfg.learning_rate, gradients[i], tuned.context_vectors[i]);
      }
      if (!prompt_is_finite(tuned)) {
        throw NumericFailureError("context vectors diverged", step);
      }
    } catch (const NumericFailureError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericFailureError(
          std::string("TPT state became non-evaluable: ") + e.what(), step);
    }
  }
  try {
    if (!std::isfinite(objective_value(m, tuned, objective))) {
      throw NumericFailureError("non-finite TPT loss", cfg.steps);
    }
  } catch (const NumericFailureError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericFailureError(
        std::string("TPT state became non-evaluable: ") + e.what(), cfg.steps);
  }
  return vanilla_predict(m, tuned, x, temperature);
}

}  // namespace seraser
