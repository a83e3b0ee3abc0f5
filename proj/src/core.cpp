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

#include "seraser/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seraser/errors.hpp"

namespace seraser {

namespace {

void check_finite(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " contains a non-finite entry");
    }
  }
}

}  // namespace

PredictionDistribution::PredictionDistribution(std::vector<double> p,
                                               std::vector<std::string> l)
    : probs(std::move(p)), labels(std::move(l)) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("probs and labels must have equal length");
  }
  if (probs.size() < 2) {
    throw std::invalid_argument("a prediction distribution needs K >= 2 classes");
  }
  check_finite(probs, "probs");
  double sum = 0.0;
  for (double v : probs) {
    if (v < 0.0) throw std::invalid_argument("probabilities must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("probabilities must sum to 1 within 1e-9, got " +
                                std::to_string(sum));
  }
}

SimilarityVector::SimilarityVector(std::vector<double> s, double t,
                                   std::vector<std::string> l)
    : sims(std::move(s)), temperature(t), labels(std::move(l)) {
  if (sims.size() != labels.size()) {
    throw std::invalid_argument("sims and labels must have equal length");
  }
  if (sims.size() < 2) {
    throw std::invalid_argument("a similarity vector needs K >= 2 classes");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("temperature must be positive");
  }
  check_finite(sims, "sims");
  for (double v : sims) {
    if (v < -1.0 - 1e-6 || v > 1.0 + 1e-6) {
      throw std::invalid_argument("cosine similarity out of [-1, 1]: " +
                                  std::to_string(v));
    }
  }
}

UniformTarget::UniformTarget(int k_in) : k(k_in) {
  if (k < 2) throw std::invalid_argument("uniform target needs k >= 2");
}

PredictionDistribution UniformTarget::to_distribution(
    std::vector<std::string> labels) const {
  if (static_cast<int>(labels.size()) != k) {
    throw std::invalid_argument("uniform target label count mismatch");
  }
  return PredictionDistribution(std::vector<double>(k, 1.0 / k),
                                std::move(labels));
}

PredictionDistribution softmax_from_similarities(const SimilarityVector& s) {
  const double max_logit =
      *std::max_element(s.sims.begin(), s.sims.end()) / s.temperature;
  std::vector<double> probs(s.sims.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < s.sims.size(); ++k) {
    probs[k] = std::exp(s.sims[k] / s.temperature - max_logit);
    sum += probs[k];
  }
  for (double& v : probs) v /= sum;
  return PredictionDistribution(std::move(probs), s.labels);
}

double kl_divergence(const PredictionDistribution& p,
                     const PredictionDistribution& q) {
  if (p.labels != q.labels) {
    throw std::invalid_argument("kl_divergence requires identical label sets");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < p.probs.size(); ++k) {
    const double pk = p.probs[k];
    if (pk == 0.0) continue;  // 0 * ln(0/q) = 0
    if (q.probs[k] == 0.0) {
      throw DivergenceUndefinedError(
          "KL undefined: q[" + p.labels[k] + "] = 0 while p > 0");
    }
    total += pk * std::log(pk / q.probs[k]);
  }
  return total;
}

double kl_to_uniform(const PredictionDistribution& p) {
  const double k = static_cast<double>(p.probs.size());
  double total = 0.0;
  for (double pk : p.probs) {
    if (pk == 0.0) continue;
    total += pk * std::log(pk * k);
  }
  return total;
}

double entropy(const PredictionDistribution& p) {
  double h = 0.0;
  for (double pk : p.probs) {
    if (pk == 0.0) continue;
    h -= pk * std::log(pk);
  }
  return h;
}

std::size_t argmax_index(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::string argmax_predict(const PredictionDistribution& p) {
  return p.labels[argmax_index(p.probs)];
}

}  // namespace seraser
