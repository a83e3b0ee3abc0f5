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

#ifndef SERASER_ERASER_HPP_
#define SERASER_ERASER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seraser/augment.hpp"
#include "seraser/auxiliary.hpp"
#include "seraser/image.hpp"
#include "seraser/model.hpp"

namespace seraser {

struct EraserConfig {
  int steps = 8;
  double learning_rate = 0.1;
  double erase_weight = 1.0;  // lambda_e
  double keep_weight = 1.0;   // lambda_k
  int keep_views = 8;
  AugmentPolicy augment;
  std::vector<AuxStrategy> strategies = {AuxStrategy::kAnnotationBackground};
  int random_patch_count = 4;
  int reference_count = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct StepRecord {
  double total = 0.0;
  double erase = 0.0;
  double keep = 0.0;
};

struct AdaptationDiagnostics {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<StepRecord> trace;  // steps + 1 entries, index 0 = before step 1
  std::vector<std::string> strategies_used;
  int steps = 0;
};

// Everything predict_with_adaptation may need for one test sample. The mask
// feeds the annotation strategy and the keep loss; the pool feeds the
// reference strategy.
struct SampleInput {
  Image image;
  std::optional<ForegroundMask> mask;
  std::vector<Image> reference_pool;
};

struct PredictionResult {
  std::string predicted_label;
  PredictionDistribution distribution;
  AdaptationDiagnostics diagnostics;
};

// Per-test-sample adaptation state. The prompt starts from the injected
// initialization and is restored to it after every prediction; the model and
// class tokens are never mutated.
class AdaptationSession {
 public:
  AdaptationSession(ModelHandle model, PromptContext initial_prompt,
                    EraserConfig config, double temperature,
                    std::string sample_id);

  const PromptContext& prompt() const { return prompt_; }
  const EraserConfig& config() const { return config_; }

  // Mean KL-to-uniform of the predictions on the auxiliary images, at the
  // session's current prompt.
  double erase_loss(const AuxiliaryImageSet& aux) const;

  // Entropy of the prediction averaged over augmented views of the retained
  // content (the boxed foreground when a mask exists, the full image
  // otherwise).
  double keep_loss(const Image& x, const std::optional<ForegroundMask>& mask) const;

  // Runs config.steps gradient-descent steps on
  // erase_weight * erase + keep_weight * keep, updating only the context
  // vectors. Returns the adapted prompt; the session keeps it until reset().
  PromptContext adapt_prompt(const Image& x,
                             const std::optional<ForegroundMask>& mask,
                             const std::vector<AuxiliaryImageSet>& aux_sets,
                             AdaptationDiagnostics* diagnostics = nullptr);

  // Builds the auxiliary sets for config.strategies, adapts, classifies the
  // original image with the adapted prompt, then resets the prompt.
  PredictionResult predict_with_adaptation(const SampleInput& input);

  void reset() { prompt_ = initial_prompt_; }

 private:
  std::vector<Embedding> keep_view_embeddings(
      const Image& x, const std::optional<ForegroundMask>& mask) const;
  std::vector<AuxiliaryImageSet> build_auxiliary_sets(const SampleInput& input) const;

  ModelHandle model_;
  PromptContext initial_prompt_;
  PromptContext prompt_;
  EraserConfig config_;
  double temperature_;
  std::string sample_id_;
};

}  // namespace seraser

#endif  // SERASER_ERASER_HPP_
