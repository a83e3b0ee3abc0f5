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

#ifndef SERASER_S2E_HPP_
#define SERASER_S2E_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seraser/image.hpp"
#include "seraser/model.hpp"

namespace seraser {

// Two classes with their habitual contexts (e.g. camel/desert,
// deer/grassland).
struct ClassPair {
  std::string class_a;
  std::string class_b;
  std::string association_a;
  std::string association_b;

  void validate() const;
};

std::vector<ClassPair> read_class_pairs(const std::filesystem::path& path);

// A prompt for one subject rendered in the *other* class's context.
struct GenerationRequest {
  std::string subject_class;
  std::string context;  // the swapped association
  std::string prompt;   // "a photo of a {class} in {context}"
  int count = 1;
  std::uint64_t seed = 0;
};

// Swaps the contexts: (class_a, association_b) and (class_b, association_a).
std::pair<GenerationRequest, GenerationRequest> swap_associations(
    const ClassPair& pair, int count, std::uint64_t seed);

// Generated image plus the exact mask when the generator knows it (the stub
// does; real generators return nullopt).
struct GeneratedImage {
  Image image;
  std::optional<ForegroundMask> mask;
};

class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  virtual std::string identity() const = 0;
  virtual std::vector<GeneratedImage> generate(const GenerationRequest& request) const = 0;
};

// Offline generator: composes the toy glyph of the subject class over the
// texture of the swapped context. A decoy fraction of outputs are
// glyph-free backgrounds, standing in for failed generations.
class StubGeneratorClient final : public GeneratorClient {
 public:
  StubGeneratorClient(std::vector<std::string> classes,
                      std::vector<std::string> contexts, double decoy_fraction,
                      std::uint64_t world_seed);

  std::string identity() const override { return "stub"; }
  std::vector<GeneratedImage> generate(const GenerationRequest& request) const override;

  // Shortcut-free toy backend over the same classes, used as the presence
  // filter judge.
  ModelHandle filter_model() const;

 private:
  int class_index(const std::string& name) const;
  int context_index(const std::string& name) const;

  std::vector<std::string> classes_;
  std::vector<std::string> contexts_;
  double decoy_fraction_;
  std::shared_ptr<const class ToyBackend> world_;
};

struct FilterOutcome {
  std::vector<int> kept_indices;
  std::vector<double> scores;  // presence probability per input image
};

// Zero-shot presence check: softmax over {subject class, background-only}
// hypotheses; keeps images whose subject probability strictly exceeds the
// threshold.
FilterOutcome filter_images(const ModelBackend& m, const PromptContext& prompt,
                            const std::vector<Image>& images,
                            const std::string& subject_class, double threshold,
                            double temperature);

struct S2eBuildOptions {
  std::filesystem::path pairs_path;
  std::string client = "stub";
  int count = 25;              // images per generation request
  double threshold = 0.5;
  double decoy_fraction = 0.2;  // stub only
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

struct S2eBuildSummary {
  std::filesystem::path manifest_path;
  int generated = 0;
  int kept = 0;
  int rejected = 0;
};

// Full pipeline: swap associations, generate, filter, emit PNGs + masks +
// manifest + a rejection log with per-image scores. Deterministic with the
// stub client.
S2eBuildSummary s2e_build(const S2eBuildOptions& options);

}  // namespace seraser

#endif  // SERASER_S2E_HPP_
