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

#ifndef SERASER_MODEL_HPP_
#define SERASER_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "seraser/core.hpp"
#include "seraser/image.hpp"
#include "seraser/linalg.hpp"

namespace seraser {

// Unit-norm embedding produced by an encoder.
struct Embedding {
  Vec values;
};

// Learnable prompt state: M shared context vectors (the only parameters any
// optimizer in this library may touch) plus the fixed per-class tokens. The
// tokens are shared immutable state owned by the backend.
struct PromptContext {
  std::vector<Vec> context_vectors;                       // M x E
  std::shared_ptr<const std::vector<Vec>> class_tokens;   // K x E, never mutated

  int context_length() const { return static_cast<int>(context_vectors.size()); }
  int num_classes() const { return static_cast<int>(class_tokens->size()); }
};

// A differentiable objective over the prompt, expressed in the loss algebra
// this library uses: every term is either a mean KL-to-uniform over a set of
// image embeddings or the entropy of the mean prediction over a set of image
// embeddings. Backends evaluate gradients of this structure with their own
// differentiation machinery (the toy backend, in closed form).
struct LossTerm {
  enum class Kind { kKlToUniform, kEntropyOfMean };
  Kind kind = Kind::kKlToUniform;
  std::vector<Embedding> image_embeddings;
  double weight = 1.0;
};

struct PromptObjective {
  std::vector<LossTerm> terms;
  double temperature = 0.01;
};

// Encoder pair abstraction. Implementations must be immutable after
// construction (verifiable through fingerprint()) and safe to share across
// threads.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::string> labels() const = 0;
  virtual int input_height() const = 0;
  virtual int input_width() const = 0;
  virtual int input_channels() const = 0;
  virtual int embedding_dim() const = 0;
  virtual int context_dim() const = 0;     // E
  virtual int context_length() const = 0;  // M
  virtual bool provides_prompt_gradients() const = 0;

  // Hash of every fixed weight; identical before and after any adaptation.
  virtual std::string fingerprint() const = 0;

  virtual Embedding encode_image(const Image& x) const = 0;
  virtual Embedding encode_text(const PromptContext& pc, int class_index) const = 0;

  // Embedding of the class-free hypothesis ("background only"); used by the
  // zero-shot presence filter.
  virtual Embedding encode_background_text(const PromptContext& pc) const = 0;

  // The hand-crafted prompt analogue: deterministic initialization derived
  // from the given seed, with this backend's class tokens attached.
  virtual PromptContext default_prompt(std::uint64_t seed) const = 0;

  // d(objective)/d(v_i) for each of the M context vectors. Throws
  // UnsupportedOperationError when provides_prompt_gradients() is false.
  virtual std::vector<Vec> prompt_gradient(const PromptContext& pc,
                                           const PromptObjective& objective) const = 0;
};

using ModelHandle = std::shared_ptr<const ModelBackend>;

// Cosine similarities between one image embedding and all K class text
// embeddings under the given prompt.
SimilarityVector class_similarities(const ModelBackend& m,
                                    const PromptContext& pc,
                                    const Embedding& image_embedding,
                                    double temperature);

// Objective value computed through the public distribution ops; the
// reference path the backend gradients are checked against.
double objective_value(const ModelBackend& m, const PromptContext& pc,
                       const PromptObjective& objective);

std::uint64_t prompt_context_hash(const PromptContext& pc);
std::uint64_t class_tokens_hash(const PromptContext& pc);
bool prompt_is_finite(const PromptContext& pc);

}  // namespace seraser

#endif  // SERASER_MODEL_HPP_
