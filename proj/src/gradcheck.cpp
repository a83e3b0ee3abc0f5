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

#include "seraser/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "seraser/auxiliary.hpp"

namespace seraser {

GradCheckResult run_gradient_check(const ToyBackend& backend, int num_pairs,
                                   std::uint64_t seed, double fd_step) {
  const auto& spec = backend.spec();
  const int jitter_lo = 4;
  const int jitter_hi = ToyBackend::kCanvas - ToyBackend::kGlyphBox - 4;

  GradCheckResult result;
  for (int pair = 0; pair < num_pairs; ++pair) {
    Rng rng(derive_seed(seed, "gradcheck", std::to_string(pair)));

    PromptContext prompt = backend.default_prompt(rng.next_u64());
    for (auto& v : prompt.context_vectors) {
      for (double& e : v) e += 0.2 * rng.normal();
    }

    auto random_image = [&]() {
      const int k = rng.uniform_int(0, spec.num_classes - 1);
      const int b = rng.uniform_int(0, spec.num_backgrounds - 1);
      const int oy = rng.uniform_int(jitter_lo, jitter_hi);
      const int ox = rng.uniform_int(jitter_lo, jitter_hi);
      return backend.compose_image(k, b, oy, ox, 0.015, rng);
    };

    // Combined objective: erase KL on one background extraction plus one raw
    // image, keep entropy over two more images.
    PromptObjective objective;
    objective.temperature = 0.01;
    {
      LossTerm erase;
      erase.kind = LossTerm::Kind::kKlToUniform;
      erase.weight = 1.0;
      const int k = rng.uniform_int(0, spec.num_classes - 1);
      const int oy = rng.uniform_int(jitter_lo, jitter_hi);
      const int ox = rng.uniform_int(jitter_lo, jitter_hi);
      const int b = rng.uniform_int(0, spec.num_backgrounds - 1);
      const Image composed = backend.compose_image(k, b, oy, ox, 0.015, rng);
      const auto mask = backend.glyph_mask(k, oy, ox);
      erase.image_embeddings.push_back(
          backend.encode_image(extract_background(composed, mask).images[0]));
      erase.image_embeddings.push_back(backend.encode_image(random_image()));
      objective.terms.push_back(std::move(erase));

      LossTerm keep;
      keep.kind = LossTerm::Kind::kEntropyOfMean;
      keep.weight = 1.0;
      keep.image_embeddings.push_back(backend.encode_image(random_image()));
      keep.image_embeddings.push_back(backend.encode_image(random_image()));
      objective.terms.push_back(std::move(keep));
    }

    const auto analytic = backend.prompt_gradient(prompt, objective);

    double diff2 = 0.0;
    double fd_norm2 = 0.0;
    for (std::size_t i = 0; i < prompt.context_vectors.size(); ++i) {
      for (std::size_t e = 0; e < prompt.context_vectors[i].size(); ++e) {
        PromptContext plus = prompt;
        PromptContext minus = prompt;
        plus.context_vectors[i][e] += fd_step;
        minus.context_vectors[i][e] -= fd_step;
        const double fd = (objective_value(backend, plus, objective) -
                           objective_value(backend, minus, objective)) /
                          (2.0 * fd_step);
        const double d = analytic[i][e] - fd;
        diff2 += d * d;
        fd_norm2 += fd * fd;
      }
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(fd_norm2), 1e-12);
    result.per_pair.push_back(rel);
    result.max_rel_error = std::max(result.max_rel_error, rel);
  }
  return result;
}

}  // namespace seraser
