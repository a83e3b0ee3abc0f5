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

#ifndef SERASER_TOY_BACKEND_HPP_
#define SERASER_TOY_BACKEND_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "seraser/image.hpp"
#include "seraser/model.hpp"
#include "seraser/rng.hpp"

namespace seraser {

// Desk-scale stand-in for a pretrained vision-language encoder pair, with a
// deliberately planted background shortcut.
//
// Images are a class glyph (a shape filled with a class-specific grating)
// composited over a background texture (a full-canvas grating). The image
// encoder measures how much of each glyph grating and each texture grating
// the pixels contain and emits
//
//   raw = anchor_bias + sum_k glyph_resp[k] * glyph_gain * d_k
//       + sum_b tex_resp[b] * (shortcut_strength * tex_gain * d_assoc(b)
//                              + side_gain * e_b)
//
// unit-normalized, where d_k is the signal direction the text encoder uses
// for class k and assoc(b) = b mod K. With shortcut_strength > 0 the
// background texture pushes the image embedding toward the text direction of
// its associated class, which is exactly the decision shortcut the eraser is
// supposed to remove. All similarities share a dominant anchor component so
// that cosine gaps are small and a 0.01-temperature softmax lands in a
// realistic confidence range.
//
// The text encoder computes normalize(W_txt * (mean(v_1..v_M) + c_k)) with a
// fixed orthonormal W_txt whose column span covers all signal directions, so
// the context vectors can reach them during adaptation.
struct ToyWorldSpec {
  int num_classes = 2;
  int num_backgrounds = 2;
  std::vector<int> glyph_patterns;    // defaults to 0..K-1
  std::vector<int> texture_patterns;  // defaults to 0..B-1
  std::vector<std::string> class_names;    // defaults to the glyph shape names
  std::vector<std::string> texture_names;  // defaults to the texture names
  double shortcut_strength = 1.0;     // in [0, 1]
  double group_correlation = 0.95;    // rho in (0.5, 1]
  int num_test_images = 400;
  std::uint64_t seed = 0;

  void validate() const;
};

// Number of distinct glyph shapes / texture patterns available.
int toy_pattern_library_size();
std::string toy_class_name(int pattern_id);
std::string toy_texture_name(int pattern_id);

class ToyBackend final : public ModelBackend {
 public:
  explicit ToyBackend(const ToyWorldSpec& spec);

  std::string name() const override { return "toy"; }
  std::vector<std::string> labels() const override { return labels_; }
  int input_height() const override { return kCanvas; }
  int input_width() const override { return kCanvas; }
  int input_channels() const override { return 3; }
  int embedding_dim() const override { return kEmbedDim; }
  int context_dim() const override { return kContextDim; }
  int context_length() const override { return kContextLen; }
  bool provides_prompt_gradients() const override { return true; }
  std::string fingerprint() const override { return fingerprint_; }

  Embedding encode_image(const Image& x) const override;
  Embedding encode_text(const PromptContext& pc, int class_index) const override;
  Embedding encode_background_text(const PromptContext& pc) const override;
  PromptContext default_prompt(std::uint64_t seed) const override;
  std::vector<Vec> prompt_gradient(const PromptContext& pc,
                                   const PromptObjective& objective) const override;

  // Text-encoder preactivation W_txt * (mean(v) + c_k), before the unit
  // normalization; the quantity the closed-form context sensitivity
  // W_txt * delta / M is stated against.
  Vec text_preactivation(const PromptContext& pc, int class_index) const;

  // Composites a glyph over a texture. Offsets place the glyph box; noise_amp
  // adds per-pixel jitter before 8-bit quantization.
  Image compose_image(int class_index, int background_index, int offset_y,
                      int offset_x, double noise_amp, Rng& rng) const;
  ForegroundMask glyph_mask(int class_index, int offset_y, int offset_x) const;
  int glyph_box_size() const { return kGlyphBox; }

  const ToyWorldSpec& spec() const { return spec_; }
  const std::vector<std::string>& texture_names() const { return texture_names_; }

  // Test hook for the gradcheck negative control: returns a copy of this
  // backend whose analytic gradients are deliberately wrong.
  std::shared_ptr<ToyBackend> with_corrupted_gradients() const;

  static constexpr int kCanvas = 64;
  static constexpr int kGlyphBox = 32;
  static constexpr int kEmbedDim = 64;
  static constexpr int kContextDim = 32;
  static constexpr int kContextLen = 4;

 private:
  Vec token_preactivation(const PromptContext& pc, const Vec& token) const;
  void check_prompt(const PromptContext& pc) const;

  ToyWorldSpec spec_;
  std::vector<std::string> labels_;
  std::vector<std::string> texture_names_;

  Mat w_txt_;                       // D x E, orthonormal columns
  std::vector<Vec> class_tokens_;   // K tokens in R^E
  Vec background_token_;            // class-free token in R^E
  std::shared_ptr<const std::vector<Vec>> shared_tokens_;

  Vec anchor_dir_;                  // mu in R^D
  std::vector<Vec> class_dirs_;     // d_k
  std::vector<Vec> texture_dirs_;   // e_b
  Vec image_bias_;                  // anchor_gain * mu

  std::vector<Image> glyph_templates_;    // zero-mean matched filters
  std::vector<Image> texture_templates_;
  std::vector<Vec> glyph_out_dirs_;       // glyph_gain * d_k
  std::vector<Vec> texture_out_dirs_;     // shortcut mix + side direction

  std::string fingerprint_;
  bool corrupt_gradients_ = false;
};

// One generated test sample with its exact mask.
struct ToySample {
  std::string id;
  int class_index = 0;
  int background_index = 0;
  std::string label;
  std::string group;  // "{class}_on_{texture}"
  Image image;
  ForegroundMask mask;
};

struct ToyWorld {
  ModelHandle model;
  std::vector<ToySample> samples;
  std::vector<std::string> labels;
};

// Deterministic under the spec: same spec, byte-identical world.
ToyWorld build_toy_world(const ToyWorldSpec& spec);

}  // namespace seraser

#endif  // SERASER_TOY_BACKEND_HPP_
