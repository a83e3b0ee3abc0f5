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

#include "seraser/s2e.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "seraser/errors.hpp"
#include "seraser/io.hpp"
#include "seraser/rng.hpp"
#include "seraser/toy_backend.hpp"

namespace seraser {

namespace {

using nlohmann::json;

std::string render_prompt(const std::string& subject, const std::string& context) {
  return "a photo of a " + subject + " in " + context;
}

}  // namespace

void ClassPair::validate() const {
  if (class_a.empty() || class_b.empty()) {
    throw std::invalid_argument("class names must be non-empty");
  }
  if (class_a == class_b) {
    throw std::invalid_argument("a class pair needs two distinct classes");
  }
  if (association_a.empty() || association_b.empty()) {
    throw std::invalid_argument("associations must be non-empty");
  }
}

std::vector<ClassPair> read_class_pairs(const std::filesystem::path& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!root.is_array()) {
    throw ParseError(path.string() + ": expected a JSON array of class pairs");
  }
  std::vector<ClassPair> pairs;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& row = root[i];
    const std::string where = path.string() + "[" + std::to_string(i) + "]";
    if (!row.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, unused] : row.items()) {
      if (key != "class_a" && key != "class_b" && key != "association_a" &&
          key != "association_b") {
        throw ParseError(where + ": unknown key \"" + key + "\"");
      }
    }
    ClassPair pair;
    try {
      pair.class_a = row.at("class_a").get<std::string>();
      pair.class_b = row.at("class_b").get<std::string>();
      pair.association_a = row.at("association_a").get<std::string>();
      pair.association_b = row.at("association_b").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    pair.validate();
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw ParseError(path.string() + ": no class pairs");
  return pairs;
}

std::pair<GenerationRequest, GenerationRequest> swap_associations(
    const ClassPair& pair, int count, std::uint64_t seed) {
  pair.validate();
  if (count < 1) throw std::invalid_argument("generation count must be >= 1");
  GenerationRequest first{pair.class_a, pair.association_b,
                          render_prompt(pair.class_a, pair.association_b), count,
                          derive_seed(seed, "s2e-request",
                                      pair.class_a + "|" + pair.association_b)};
  GenerationRequest second{pair.class_b, pair.association_a,
                           render_prompt(pair.class_b, pair.association_a), count,
                           derive_seed(seed, "s2e-request",
                                       pair.class_b + "|" + pair.association_a)};
  return {std::move(first), std::move(second)};
}

StubGeneratorClient::StubGeneratorClient(std::vector<std::string> classes,
                                         std::vector<std::string> contexts,
                                         double decoy_fraction,
                                         std::uint64_t world_seed)
    : classes_(std::move(classes)),
      contexts_(std::move(contexts)),
      decoy_fraction_(decoy_fraction) {
  if (classes_.size() < 2) {
    throw std::invalid_argument("the stub generator needs at least two classes");
  }
  if (contexts_.empty()) {
    throw std::invalid_argument("the stub generator needs at least one context");
  }
  if (!(decoy_fraction_ >= 0.0 && decoy_fraction_ < 1.0)) {
    throw std::invalid_argument("decoy_fraction must be in [0, 1)");
  }
  ToyWorldSpec spec;
  spec.num_classes = static_cast<int>(classes_.size());
  spec.num_backgrounds = static_cast<int>(contexts_.size());
  spec.class_names = classes_;
  spec.texture_names = contexts_;
  spec.shortcut_strength = 0.0;  // the filter judge carries no planted shortcut
  spec.seed = world_seed;
  world_ = std::make_shared<ToyBackend>(spec);
}

int StubGeneratorClient::class_index(const std::string& name) const {
  const auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) {
    throw GenerationError("stub generator knows no class \"" + name + "\"");
  }
  return static_cast<int>(it - classes_.begin());
}

int StubGeneratorClient::context_index(const std::string& name) const {
  const auto it = std::find(contexts_.begin(), contexts_.end(), name);
  if (it == contexts_.end()) {
    throw GenerationError("stub generator knows no context \"" + name + "\"");
  }
  return static_cast<int>(it - contexts_.begin());
}

ModelHandle StubGeneratorClient::filter_model() const { return world_; }

std::vector<GeneratedImage> StubGeneratorClient::generate(
    const GenerationRequest& request) const {
  if (request.count < 1) {
    throw GenerationError("generation count must be >= 1 (request: " +
                          request.prompt + ")");
  }
  const int subject = class_index(request.subject_class);
  const int context = context_index(request.context);
  const int jitter_lo = 4;
  const int jitter_hi = ToyBackend::kCanvas - ToyBackend::kGlyphBox - 4;

  std::vector<GeneratedImage> images;
  images.reserve(request.count);
  for (int i = 0; i < request.count; ++i) {
    Rng rng(derive_seed(request.seed, "s2e-image",
                        request.prompt + "#" + std::to_string(i)));
    const int oy = rng.uniform_int(jitter_lo, jitter_hi);
    const int ox = rng.uniform_int(jitter_lo, jitter_hi);
    // Bresenham-style spreading puts floor(count * fraction) decoys evenly.
    const bool decoy =
        std::floor((i + 1) * decoy_fraction_) > std::floor(i * decoy_fraction_);
    GeneratedImage out;
    if (decoy) {
      // Failed generation stand-in: pure background, subject absent.
      Image canvas = world_->compose_image(subject, context, oy, ox, 0.015, rng);
      const auto mask = world_->glyph_mask(subject, oy, ox);
      out.image = std::move(canvas);
      for (int y = 0; y < out.image.height; ++y) {
        for (int x = 0; x < out.image.width; ++x) {
          if (!mask.at(y, x)) continue;
          for (int c = 0; c < 3; ++c) out.image.at(y, x, c) = 0.0;
        }
      }
      out.mask = std::nullopt;
    } else {
      out.image = world_->compose_image(subject, context, oy, ox, 0.015, rng);
      out.mask = world_->glyph_mask(subject, oy, ox);
    }
    images.push_back(std::move(out));
  }
  return images;
}

FilterOutcome filter_images(const ModelBackend& m, const PromptContext& prompt,
                            const std::vector<Image>& images,
                            const std::string& subject_class, double threshold,
                            double temperature) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must be in (0, 1]");
  }
  const auto labels = m.labels();
  const auto it = std::find(labels.begin(), labels.end(), subject_class);
  if (it == labels.end()) {
    throw std::invalid_argument("subject class \"" + subject_class +
                                "\" is not in the model label set");
  }
  const int subject = static_cast<int>(it - labels.begin());

  FilterOutcome outcome;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Embedding w = m.encode_image(images[i]);
    const Embedding subject_text = m.encode_text(prompt, subject);
    const Embedding background_text = m.encode_background_text(prompt);
    const auto p = softmax_from_similarities(SimilarityVector(
        {dot(subject_text.values, w.values), dot(background_text.values, w.values)},
        temperature, {subject_class, "background only"}));
    const double score = p.probs[0];
    outcome.scores.push_back(score);
    if (score > threshold) outcome.kept_indices.push_back(static_cast<int>(i));
  }
  return outcome;
}

S2eBuildSummary s2e_build(const S2eBuildOptions& options) {
  const auto pairs = read_class_pairs(options.pairs_path);
  if (options.client != "stub") {
    throw UnsupportedOperationError(
        "generator client \"" + options.client +
        "\" is not available in-tree; only \"stub\" ships with the toolkit");
  }

  std::vector<std::string> classes;
  std::vector<std::string> contexts;
  auto add_unique = [](std::vector<std::string>& list, const std::string& value) {
    if (std::find(list.begin(), list.end(), value) == list.end()) {
      list.push_back(value);
    }
  };
  for (const auto& pair : pairs) {
    add_unique(classes, pair.class_a);
    add_unique(classes, pair.class_b);
    add_unique(contexts, pair.association_a);
    add_unique(contexts, pair.association_b);
  }

  const StubGeneratorClient client(classes, contexts, options.decoy_fraction,
                                   derive_seed(options.seed, "s2e-world"));
  const ModelHandle model = client.filter_model();
  // The presence check runs with an empty context (just the tokens), so the
  // verdict carries no prompt-initialization noise.
  PromptContext prompt = model->default_prompt(0);
  for (auto& v : prompt.context_vectors) std::fill(v.begin(), v.end(), 0.0);
  constexpr double kFilterTemperature = 0.01;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir / "images", ec);
  fs::create_directories(options.out_dir / "masks", ec);
  if (ec) {
    throw IoError("cannot create " + options.out_dir.string() + ": " + ec.message());
  }

  S2eBuildSummary summary;
  std::ostringstream manifest;
  json filter_log = json::array();
  for (const auto& pair : pairs) {
    const auto [first, second] =
        swap_associations(pair, options.count, options.seed);
    for (const auto& request : {first, second}) {
      const auto generated = client.generate(request);
      std::vector<Image> plain;
      plain.reserve(generated.size());
      for (const auto& g : generated) plain.push_back(g.image);
      const auto outcome = filter_images(*model, prompt, plain,
                                         request.subject_class, options.threshold,
                                         kFilterTemperature);
      const std::string group = request.subject_class + "_" + request.context;
      summary.generated += static_cast<int>(generated.size());
      for (std::size_t i = 0; i < generated.size(); ++i) {
        const bool kept =
            std::find(outcome.kept_indices.begin(), outcome.kept_indices.end(),
                      static_cast<int>(i)) != outcome.kept_indices.end();
        filter_log.push_back({{"request", request.prompt},
                              {"index", i},
                              {"score", outcome.scores[i]},
                              {"kept", kept}});
        if (!kept) {
          summary.rejected += 1;
          continue;
        }
        summary.kept += 1;
        const std::string id = group + "_" + std::to_string(i);
        const std::string image_rel = "images/" + id + ".png";
        write_png(options.out_dir / image_rel, generated[i].image);
        json row = {{"id", id},
                    {"image", image_rel},
                    {"label", request.subject_class},
                    {"group", group}};
        if (generated[i].mask) {
          const std::string mask_rel = "masks/" + id + ".png";
          write_mask_png(options.out_dir / mask_rel, *generated[i].mask);
          row["mask"] = mask_rel;
        }
        manifest << row.dump() << "\n";
      }
    }
  }
  if (summary.kept == 0) {
    throw GenerationError("the presence filter rejected every generated image");
  }
  summary.manifest_path = options.out_dir / "manifest.jsonl";
  write_text_file_atomic(summary.manifest_path, manifest.str());
  write_text_file_atomic(options.out_dir / "filter_log.json",
                         filter_log.dump(2) + "\n");
  return summary;
}

}  // namespace seraser
