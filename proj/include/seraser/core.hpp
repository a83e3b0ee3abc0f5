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

#ifndef SERASER_CORE_HPP_
#define SERASER_CORE_HPP_

#include <string>
#include <vector>

namespace seraser {

// Normalized probability vector over an ordered label set. Entries are
// non-negative, sum to 1 within 1e-9, and K >= 2. All logarithms in this
// library are natural logs.
struct PredictionDistribution {
  std::vector<double> probs;
  std::vector<std::string> labels;

  PredictionDistribution(std::vector<double> probs,
                         std::vector<std::string> labels);

  std::size_t size() const { return probs.size(); }
};

// Cosine similarities (one per class) plus the softmax temperature.
struct SimilarityVector {
  std::vector<double> sims;       // each in [-1, 1] within 1e-6
  double temperature;             // > 0
  std::vector<std::string> labels;

  SimilarityVector(std::vector<double> sims, double temperature,
                   std::vector<std::string> labels);
};

// The uniform distribution over k classes.
struct UniformTarget {
  int k;

  explicit UniformTarget(int k);
  PredictionDistribution to_distribution(std::vector<std::string> labels) const;
};

// softmax(sims / temperature), stabilized by subtracting the max logit
// before exponentiation (temperature 0.01 inflates logits by 100x).
PredictionDistribution softmax_from_similarities(const SimilarityVector& s);

// KL(p || q) = sum_k p_k ln(p_k / q_k), with 0 * ln(0/q) = 0. Throws
// std::invalid_argument on mismatched labels and DivergenceUndefinedError
// when q has a zero coordinate where p > 0.
double kl_divergence(const PredictionDistribution& p,
                     const PredictionDistribution& q);

double kl_to_uniform(const PredictionDistribution& p);

// -sum_k p_k ln p_k with 0 * ln 0 = 0. Lies in [0, ln K].
double entropy(const PredictionDistribution& p);

// Label of the largest probability; ties broken by lowest label index.
std::string argmax_predict(const PredictionDistribution& p);

std::size_t argmax_index(const std::vector<double>& values);

}  // namespace seraser

#endif  // SERASER_CORE_HPP_
