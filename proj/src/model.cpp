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

#include "seraser/model.hpp"

#include <cmath>
#include <stdexcept>

#include "seraser/rng.hpp"

namespace seraser {

SimilarityVector class_similarities(const ModelBackend& m,
                                    const PromptContext& pc,
                                    const Embedding& image_embedding,
                                    double temperature) {
  const auto labels = m.labels();
  std::vector<double> sims(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    sims[k] = dot(m.encode_text(pc, static_cast<int>(k)).values,
                  image_embedding.values);
  }
  return SimilarityVector(std::move(sims), temperature, labels);
}

double objective_value(const ModelBackend& m, const PromptContext& pc,
                       const PromptObjective& objective) {
  double total = 0.0;
  for (const auto& term : objective.terms) {
    if (term.image_embeddings.empty()) {
      throw std::invalid_argument("loss term has no image embeddings");
    }
    const double n = static_cast<double>(term.image_embeddings.size());
    if (term.kind == LossTerm::Kind::kKlToUniform) {
      double sum = 0.0;
      for (const auto& w : term.image_embeddings) {
        sum += kl_to_uniform(softmax_from_similarities(
            class_similarities(m, pc, w, objective.temperature)));
      }
      total += term.weight * sum / n;
    } else {
      std::vector<double> mean;
      std::vector<std::string> labels;
      for (const auto& w : term.image_embeddings) {
        auto p = softmax_from_similarities(
            class_similarities(m, pc, w, objective.temperature));
        if (mean.empty()) {
          mean.assign(p.probs.begin(), p.probs.end());
          labels = p.labels;
        } else {
          for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p.probs[k];
        }
      }
      for (double& v : mean) v /= n;
      total += term.weight *
               entropy(PredictionDistribution(std::move(mean), std::move(labels)));
    }
  }
  return total;
}

std::uint64_t prompt_context_hash(const PromptContext& pc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& v : pc.context_vectors) {
    h = fnv1a64(v.data(), v.size() * sizeof(double), h);
  }
  return h;
}

std::uint64_t class_tokens_hash(const PromptContext& pc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& v : *pc.class_tokens) {
    h = fnv1a64(v.data(), v.size() * sizeof(double), h);
  }
  return h;
}

bool prompt_is_finite(const PromptContext& pc) {
  for (const auto& v : pc.context_vectors) {
    for (double e : v) {
      if (!std::isfinite(e)) return false;
    }
  }
  return true;
}

}  // namespace seraser
