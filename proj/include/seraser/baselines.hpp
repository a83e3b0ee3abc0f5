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

#ifndef SERASER_BASELINES_HPP_
#define SERASER_BASELINES_HPP_

#include <cstdint>
#include <string>

#include "seraser/augment.hpp"
#include "seraser/image.hpp"
#include "seraser/model.hpp"

namespace seraser {

struct TptConfig {
  int num_views = 32;
  double confidence_fraction = 0.1;  // rho
  int steps = 1;
  double learning_rate = 5e-3;
  AugmentPolicy augment;
  std::uint64_t seed = 0;

  void validate() const;  // requires ceil(rho * num_views) >= 1
};

// ceil(rho * n) with a 1e-9 guard against floating-point products like
// 0.3 * 10 = 3.0000000000000004.
int tpt_retained_view_count(double rho, int num_views);

// Plain zero-shot classification with the unadapted prompt.
std::string vanilla_predict(const ModelBackend& m, const PromptContext& prompt,
                            const Image& x, double temperature);

// Zero-shot on the boxed foreground with the background masked out.
std::string mask_predict(const ModelBackend& m, const PromptContext& prompt,
                         const Image& x, const ForegroundMask& mask,
                         double temperature);

// Test-time prompt tuning: augmented views (view 0 = identity), keeps the
// ceil(rho * N) lowest-entropy views, tunes the context by minimizing the
// entropy of their averaged prediction, then classifies x. The caller's
// prompt is never mutated.
std::string tpt_predict(const ModelBackend& m, const PromptContext& prompt,
                        const Image& x, const TptConfig& cfg, double temperature,
                        const std::string& sample_id);

}  // namespace seraser

#endif  // SERASER_BASELINES_HPP_
