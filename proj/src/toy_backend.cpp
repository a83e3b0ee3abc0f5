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

#include "seraser/toy_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "seraser/errors.hpp"

namespace seraser {

namespace {

constexpr int kLibrarySize = 10;
constexpr double kPi = 3.14159265358979323846;

// Similarity geometry. The image-side anchor dominates every embedding so
// cosine gaps stay small (realistic for a 0.01-temperature softmax), while
// the text side keeps a substantial class component so that shared-context
// updates can actually move per-class similarities apart. The gains set who
// wins: at full shortcut strength the texture response (~0.75 * 1.0)
// outweighs the glyph response (~1.0 * 0.5), so minority-group predictions
// flip to the background's associated class. A small constant response along
// a reserved "null class" direction gives the background-only hypothesis of
// the presence filter a deterministic head start over absent subjects.
constexpr double kTextAnchorScale = 2.0;
constexpr double kTextClassScale = 0.7;
constexpr double kImageAnchorGain = 4.0;
constexpr double kGlyphGain = 0.5;
constexpr double kTextureGain = 1.0;
constexpr double kSideGain = 0.3;
constexpr double kNullGain = 0.15;
constexpr double kNoiseAmp = 0.015;

const char* kClassNames[kLibrarySize] = {"square", "disc",  "triangle", "cross",
                                         "diamond", "ring", "bars",     "wedge",
                                         "ell",     "frame"};
const char* kTextureNames[kLibrarySize] = {"dunes",  "reef",   "slate", "prairie",
                                           "tides",  "ridges", "mesa",  "tundra",
                                           "delta",  "shoal"};

constexpr double kClassColors[kLibrarySize][3] = {
    {0.90, 0.20, 0.20}, {0.20, 0.75, 0.95}, {0.95, 0.85, 0.20},
    {0.60, 0.25, 0.90}, {0.25, 0.85, 0.35}, {0.95, 0.55, 0.15},
    {0.90, 0.30, 0.70}, {0.35, 0.45, 0.95}, {0.55, 0.80, 0.20},
    {0.80, 0.60, 0.45}};
constexpr double kTextureColors[kLibrarySize][3] = {
    {0.35, 0.60, 0.75}, {0.75, 0.45, 0.30}, {0.45, 0.75, 0.55},
    {0.70, 0.70, 0.40}, {0.55, 0.40, 0.70}, {0.40, 0.70, 0.70},
    {0.75, 0.55, 0.60}, {0.50, 0.65, 0.35}, {0.60, 0.50, 0.80},
    {0.70, 0.65, 0.55}};

// Gratings use even frequencies along one axis so that any 32-pixel window
// sums to exactly zero: glyph occlusion then cancels out of every unrelated
// template response regardless of where the glyph lands.
struct GratingParams {
  double freq;
  bool along_y;
  double phase;
};

GratingParams glyph_grating(int id) {
  return {static_cast<double>(4 + 2 * id), (id % 2) != 0, 0.7 * id + 0.35};
}

GratingParams texture_grating(int id) {
  return {static_cast<double>(4 + 2 * id), (id % 2) == 0, 0.3 * id + 1.1};
}

double grating_value(const GratingParams& g, int y, int x) {
  const double t = g.along_y ? static_cast<double>(y) : static_cast<double>(x);
  return std::cos(2.0 * kPi * g.freq * t / ToyBackend::kCanvas + g.phase);
}

bool shape_contains(int shape_id, int sy, int sx) {
  const double cy = sy - 15.5;
  const double cx = sx - 15.5;
  switch (shape_id) {
    case 0:  // square
      return true;
    case 1:  // disc
      return cy * cy + cx * cx <= 15.5 * 15.5;
    case 2:  // triangle
      return std::abs(cx) <= (sy / 31.0) * 15.5;
    case 3:  // cross
      return std::abs(cx) <= 5.5 || std::abs(cy) <= 5.5;
    case 4:  // diamond
      return std::abs(cx) + std::abs(cy) <= 15.5;
    case 5:  // ring
      return cy * cy + cx * cx <= 15.5 * 15.5 && cy * cy + cx * cx >= 8.0 * 8.0;
    case 6:  // bars
      return (sy / 4) % 2 == 0;
    case 7:  // wedge
      return sx <= sy;
    case 8:  // ell
      return sx <= 10 || sy >= 21;
    case 9:  // frame
      return sy < 6 || sy >= 26 || sx < 6 || sx >= 26;
    default:
      throw std::invalid_argument("unknown shape id " + std::to_string(shape_id));
  }
}

int shape_area(int shape_id) {
  int area = 0;
  for (int y = 0; y < ToyBackend::kGlyphBox; ++y) {
    for (int x = 0; x < ToyBackend::kGlyphBox; ++x) {
      area += shape_contains(shape_id, y, x) ? 1 : 0;
    }
  }
  return area;
}

Vec color_weight(const double (&color)[3]) {
  const double n2 = color[0] * color[0] + color[1] * color[1] + color[2] * color[2];
  return {color[0] / n2, color[1] / n2, color[2] / n2};
}

double template_response(const Image& x, const Image& tmpl) {
  return dot(x.pixels, tmpl.pixels);
}

std::uint64_t hash_vec(const Vec& v, std::uint64_t h) {
  return fnv1a64(v.data(), v.size() * sizeof(double), h);
}

}  // namespace

int toy_pattern_library_size() { return kLibrarySize; }

std::string toy_class_name(int pattern_id) {
  if (pattern_id < 0 || pattern_id >= kLibrarySize) {
    throw std::invalid_argument("glyph pattern id out of range");
  }
  return kClassNames[pattern_id];
}

std::string toy_texture_name(int pattern_id) {
  if (pattern_id < 0 || pattern_id >= kLibrarySize) {
    throw std::invalid_argument("texture pattern id out of range");
  }
  return kTextureNames[pattern_id];
}

void ToyWorldSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("need at least 2 classes");
  if (num_backgrounds < 1) throw std::invalid_argument("need at least 1 background");
  if (num_classes > kLibrarySize || num_backgrounds > kLibrarySize) {
    throw std::invalid_argument("pattern library holds at most " +
                                std::to_string(kLibrarySize) + " patterns");
  }
  // Columns: anchor, K classes, B textures, one null-class direction.
  if (2 + num_classes + num_backgrounds > ToyBackend::kContextDim) {
    throw std::invalid_argument("num_classes + num_backgrounds exceeds the signal space");
  }
  if (!(shortcut_strength >= 0.0 && shortcut_strength <= 1.0)) {
    throw std::invalid_argument("shortcut_strength must be in [0, 1]");
  }
  if (!(group_correlation > 0.5 && group_correlation <= 1.0)) {
    throw std::invalid_argument("group_correlation must be in (0.5, 1]");
  }
  if (num_test_images < 1) throw std::invalid_argument("num_test_images must be >= 1");

  auto check_patterns = [](const std::vector<int>& ids, int count, const char* what) {
    if (ids.empty()) return;
    if (static_cast<int>(ids.size()) != count) {
      throw std::invalid_argument(std::string(what) + " pattern list length mismatch");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= kLibrarySize) {
        throw std::invalid_argument(std::string(what) + " pattern id out of range");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (ids[i] == ids[j]) {
          throw std::invalid_argument(std::string(what) + " patterns must be distinct");
        }
      }
    }
  };
  check_patterns(glyph_patterns, num_classes, "glyph");
  check_patterns(texture_patterns, num_backgrounds, "texture");

  auto check_names = [](const std::vector<std::string>& names, int count,
                        const char* what) {
    if (names.empty()) return;
    if (static_cast<int>(names.size()) != count) {
      throw std::invalid_argument(std::string(what) + " name list length mismatch");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].empty()) {
        throw std::invalid_argument(std::string(what) + " names must be non-empty");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (names[i] == names[j]) {
          throw std::invalid_argument(std::string(what) + " names must be distinct");
        }
      }
    }
  };
  check_names(class_names, num_classes, "class");
  check_names(texture_names, num_backgrounds, "texture");
}

ToyBackend::ToyBackend(const ToyWorldSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.glyph_patterns.empty()) {
    for (int k = 0; k < spec_.num_classes; ++k) spec_.glyph_patterns.push_back(k);
  }
  if (spec_.texture_patterns.empty()) {
    for (int b = 0; b < spec_.num_backgrounds; ++b) spec_.texture_patterns.push_back(b);
  }
  const int num_classes = spec_.num_classes;
  const int num_backgrounds = spec_.num_backgrounds;
  for (int k = 0; k < num_classes; ++k) {
    labels_.push_back(spec_.class_names.empty()
                          ? toy_class_name(spec_.glyph_patterns[k])
                          : spec_.class_names[k]);
  }
  for (int b = 0; b < num_backgrounds; ++b) {
    texture_names_.push_back(spec_.texture_names.empty()
                                 ? toy_texture_name(spec_.texture_patterns[b])
                                 : spec_.texture_names[b]);
  }

  // Orthonormal direction bank: column 0 is the anchor, then one signal
  // direction per class, then one per background texture.
  Rng rng(derive_seed(spec_.seed, "toy-weights"));
  std::vector<Vec> columns;
  for (int j = 0; j < kContextDim; ++j) {
    Vec col(kEmbedDim);
    for (double& v : col) v = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& prev : columns) axpy(-dot(col, prev), prev, col);
    }
    columns.push_back(normalized(std::move(col)));
  }
  w_txt_ = Mat(kEmbedDim, kContextDim);
  for (int r = 0; r < kEmbedDim; ++r) {
    for (int c = 0; c < kContextDim; ++c) w_txt_.at(r, c) = columns[c][r];
  }
  anchor_dir_ = columns[0];
  for (int k = 0; k < num_classes; ++k) class_dirs_.push_back(columns[1 + k]);
  for (int b = 0; b < num_backgrounds; ++b) {
    texture_dirs_.push_back(columns[1 + num_classes + b]);
  }
  const int null_index = 1 + num_classes + num_backgrounds;
  const Vec& null_dir = columns[null_index];

  for (int k = 0; k < num_classes; ++k) {
    Vec token(kContextDim, 0.0);
    token[0] = kTextAnchorScale;
    token[1 + k] = kTextClassScale;
    class_tokens_.push_back(std::move(token));
  }
  // The background-only token mirrors the class-token structure on the null
  // direction, so both presence hypotheses have equal norms.
  background_token_.assign(kContextDim, 0.0);
  background_token_[0] = kTextAnchorScale;
  background_token_[null_index] = kTextClassScale;
  shared_tokens_ = std::make_shared<const std::vector<Vec>>(class_tokens_);

  image_bias_.assign(kEmbedDim, 0.0);
  axpy(kImageAnchorGain, anchor_dir_, image_bias_);
  axpy(kNullGain, null_dir, image_bias_);

  // Matched filters: zero-mean gratings scaled so a full glyph scores ~1 and
  // an unoccluded texture scores ~1.
  for (int k = 0; k < num_classes; ++k) {
    const int pattern = spec_.glyph_patterns[k];
    const auto grating = glyph_grating(pattern);
    const auto colw = color_weight(kClassColors[pattern]);
    const double norm = 0.225 * shape_area(pattern);
    Image tmpl(kCanvas, kCanvas, 3);
    for (int y = 0; y < kCanvas; ++y) {
      for (int x = 0; x < kCanvas; ++x) {
        const double phi = grating_value(grating, y, x);
        for (int c = 0; c < 3; ++c) tmpl.at(y, x, c) = phi * colw[c] / norm;
      }
    }
    glyph_templates_.push_back(std::move(tmpl));

    Vec dir(kEmbedDim, 0.0);
    axpy(kGlyphGain, class_dirs_[k], dir);
    glyph_out_dirs_.push_back(std::move(dir));
  }
  for (int b = 0; b < num_backgrounds; ++b) {
    const int pattern = spec_.texture_patterns[b];
    const auto grating = texture_grating(pattern);
    const auto colw = color_weight(kTextureColors[pattern]);
    const double norm = 0.225 * kCanvas * kCanvas;
    Image tmpl(kCanvas, kCanvas, 3);
    for (int y = 0; y < kCanvas; ++y) {
      for (int x = 0; x < kCanvas; ++x) {
        const double phi = grating_value(grating, y, x);
        for (int c = 0; c < 3; ++c) tmpl.at(y, x, c) = phi * colw[c] / norm;
      }
    }
    texture_templates_.push_back(std::move(tmpl));

    Vec dir(kEmbedDim, 0.0);
    axpy(spec_.shortcut_strength * kTextureGain, class_dirs_[b % num_classes], dir);
    axpy(kSideGain, texture_dirs_[b], dir);
    texture_out_dirs_.push_back(std::move(dir));
  }

  std::uint64_t h = fnv1a64("toy-backend-v1");
  h = fnv1a64(&num_classes, sizeof(num_classes), h);
  h = fnv1a64(&num_backgrounds, sizeof(num_backgrounds), h);
  h = fnv1a64(w_txt_.data.data(), w_txt_.data.size() * sizeof(double), h);
  for (const auto& t : class_tokens_) h = hash_vec(t, h);
  h = hash_vec(background_token_, h);
  h = hash_vec(image_bias_, h);
  for (const auto& d : glyph_out_dirs_) h = hash_vec(d, h);
  for (const auto& d : texture_out_dirs_) h = hash_vec(d, h);
  for (const auto& t : glyph_templates_) h = hash_vec(t.pixels, h);
  for (const auto& t : texture_templates_) h = hash_vec(t.pixels, h);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  fingerprint_ = buf;
}

void ToyBackend::check_prompt(const PromptContext& pc) const {
  if (pc.context_vectors.empty()) {
    throw std::invalid_argument("prompt context needs at least one vector");
  }
  for (const auto& v : pc.context_vectors) {
    if (static_cast<int>(v.size()) != kContextDim) {
      throw std::invalid_argument("context vector dimension mismatch");
    }
  }
  if (!pc.class_tokens ||
      static_cast<int>(pc.class_tokens->size()) != spec_.num_classes) {
    throw std::invalid_argument("prompt class token count mismatch");
  }
}

Vec ToyBackend::token_preactivation(const PromptContext& pc, const Vec& token) const {
  Vec mixed(token);
  const double inv_m = 1.0 / pc.context_vectors.size();
  for (const auto& v : pc.context_vectors) axpy(inv_m, v, mixed);
  return matvec(w_txt_, mixed);
}

Embedding ToyBackend::encode_image(const Image& x) const {
  if (x.height != kCanvas || x.width != kCanvas || x.channels != 3) {
    throw std::invalid_argument("toy backend expects 64x64x3 images");
  }
  Vec raw(image_bias_);
  for (std::size_t k = 0; k < glyph_templates_.size(); ++k) {
    axpy(template_response(x, glyph_templates_[k]), glyph_out_dirs_[k], raw);
  }
  for (std::size_t b = 0; b < texture_templates_.size(); ++b) {
    axpy(template_response(x, texture_templates_[b]), texture_out_dirs_[b], raw);
  }
  return Embedding{normalized(std::move(raw))};
}

Vec ToyBackend::text_preactivation(const PromptContext& pc, int class_index) const {
  check_prompt(pc);
  if (class_index < 0 || class_index >= spec_.num_classes) {
    throw std::invalid_argument("class index out of range: " +
                                std::to_string(class_index));
  }
  return token_preactivation(pc, (*pc.class_tokens)[class_index]);
}

Embedding ToyBackend::encode_text(const PromptContext& pc, int class_index) const {
  return Embedding{normalized(text_preactivation(pc, class_index))};
}

Embedding ToyBackend::encode_background_text(const PromptContext& pc) const {
  check_prompt(pc);
  return Embedding{normalized(token_preactivation(pc, background_token_))};
}

PromptContext ToyBackend::default_prompt(std::uint64_t seed) const {
  Rng rng(derive_seed(seed, "prompt-init"));
  PromptContext pc;
  for (int i = 0; i < kContextLen; ++i) {
    Vec v(kContextDim);
    for (double& e : v) e = rng.normal();
    pc.context_vectors.push_back(normalized(std::move(v)));
  }
  pc.class_tokens = shared_tokens_;
  return pc;
}

std::vector<Vec> ToyBackend::prompt_gradient(const PromptContext& pc,
                                             const PromptObjective& objective) const {
  check_prompt(pc);
  const int num_classes = spec_.num_classes;
  const double tau = objective.temperature;
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");

  // Text embeddings under the current prompt.
  std::vector<Vec> preact(num_classes);
  std::vector<double> preact_norm(num_classes);
  std::vector<Vec> text(num_classes);
  for (int k = 0; k < num_classes; ++k) {
    preact[k] = token_preactivation(pc, (*pc.class_tokens)[k]);
    preact_norm[k] = norm(preact[k]);
    text[k] = preact[k];
    for (double& v : text[k]) v /= preact_norm[k];
  }

  // Accumulate, per class, sum over images of dL/ds_k * (w - s_k z_k).
  std::vector<Vec> residual(num_classes, Vec(kEmbedDim, 0.0));
  auto softmax_probs = [&](const Vec& w, std::vector<double>& sims) {
    sims.resize(num_classes);
    for (int k = 0; k < num_classes; ++k) sims[k] = dot(text[k], w);
    const double max_logit = *std::max_element(sims.begin(), sims.end()) / tau;
    std::vector<double> p(num_classes);
    double sum = 0.0;
    for (int k = 0; k < num_classes; ++k) {
      p[k] = std::exp(sims[k] / tau - max_logit);
      sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
  };

  for (const auto& term : objective.terms) {
    if (term.image_embeddings.empty()) {
      throw std::invalid_argument("loss term has no image embeddings");
    }
    const double inv_n = 1.0 / term.image_embeddings.size();
    if (term.kind == LossTerm::Kind::kKlToUniform) {
      for (const auto& emb : term.image_embeddings) {
        std::vector<double> sims;
        const auto p = softmax_probs(emb.values, sims);
        double loss = 0.0;
        for (int k = 0; k < num_classes; ++k) {
          if (p[k] > 0.0) loss += p[k] * std::log(p[k] * num_classes);
        }
        for (int k = 0; k < num_classes; ++k) {
          if (p[k] <= 0.0) continue;
          const double coeff = term.weight * inv_n / tau * p[k] *
                               (std::log(p[k] * num_classes) - loss);
          for (int d = 0; d < kEmbedDim; ++d) {
            residual[k][d] += coeff * (emb.values[d] - sims[k] * text[k][d]);
          }
        }
      }
    } else {
      std::vector<std::vector<double>> all_p;
      std::vector<std::vector<double>> all_sims;
      std::vector<double> mean(num_classes, 0.0);
      for (const auto& emb : term.image_embeddings) {
        std::vector<double> sims;
        all_p.push_back(softmax_probs(emb.values, sims));
        all_sims.push_back(std::move(sims));
        for (int k = 0; k < num_classes; ++k) mean[k] += inv_n * all_p.back()[k];
      }
      std::vector<double> dmean(num_classes, 0.0);
      for (int k = 0; k < num_classes; ++k) {
        dmean[k] = mean[k] > 0.0 ? -(std::log(mean[k]) + 1.0) : 0.0;
      }
      for (std::size_t i = 0; i < term.image_embeddings.size(); ++i) {
        const auto& p = all_p[i];
        double inner = 0.0;
        for (int k = 0; k < num_classes; ++k) inner += dmean[k] * p[k];
        for (int k = 0; k < num_classes; ++k) {
          const double coeff =
              term.weight * inv_n / tau * p[k] * (dmean[k] - inner);
          if (coeff == 0.0) continue;
          const auto& w = term.image_embeddings[i].values;
          for (int d = 0; d < kEmbedDim; ++d) {
            residual[k][d] += coeff * (w[d] - all_sims[i][k] * text[k][d]);
          }
        }
      }
    }
  }

  Vec accum(kEmbedDim, 0.0);
  for (int k = 0; k < num_classes; ++k) {
    axpy(1.0 / preact_norm[k], residual[k], accum);
  }
  Vec shared = matvec_transposed(w_txt_, accum);
  const double inv_m = 1.0 / pc.context_vectors.size();
  for (double& v : shared) v *= inv_m;
  if (corrupt_gradients_) {
    shared[0] += 0.05 * (1.0 + std::abs(shared[0]));
  }
  return std::vector<Vec>(pc.context_vectors.size(), shared);
}

Image ToyBackend::compose_image(int class_index, int background_index,
                                int offset_y, int offset_x, double noise_amp,
                                Rng& rng) const {
  if (class_index < 0 || class_index >= spec_.num_classes) {
    throw std::invalid_argument("class index out of range");
  }
  if (background_index < 0 || background_index >= spec_.num_backgrounds) {
    throw std::invalid_argument("background index out of range");
  }
  if (offset_y < 0 || offset_x < 0 || offset_y + kGlyphBox > kCanvas ||
      offset_x + kGlyphBox > kCanvas) {
    throw std::invalid_argument("glyph offset out of bounds");
  }
  const int glyph_pattern = spec_.glyph_patterns[class_index];
  const int texture_pattern = spec_.texture_patterns[background_index];
  const auto glyph_g = glyph_grating(glyph_pattern);
  const auto texture_g = texture_grating(texture_pattern);
  const double* glyph_color = kClassColors[glyph_pattern];
  const double* texture_color = kTextureColors[texture_pattern];

  Image img(kCanvas, kCanvas, 3);
  for (int y = 0; y < kCanvas; ++y) {
    for (int x = 0; x < kCanvas; ++x) {
      const int sy = y - offset_y;
      const int sx = x - offset_x;
      const bool in_glyph = sy >= 0 && sy < kGlyphBox && sx >= 0 &&
                            sx < kGlyphBox &&
                            shape_contains(glyph_pattern, sy, sx);
      const double phi = in_glyph ? grating_value(glyph_g, y, x)
                                  : grating_value(texture_g, y, x);
      const double* color = in_glyph ? glyph_color : texture_color;
      for (int c = 0; c < 3; ++c) {
        double v = color[c] * (0.5 + 0.45 * phi);
        v += noise_amp * (2.0 * rng.uniform() - 1.0);
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  img.quantize_to_8bit();
  return img;
}

ForegroundMask ToyBackend::glyph_mask(int class_index, int offset_y,
                                      int offset_x) const {
  const int glyph_pattern = spec_.glyph_patterns[class_index];
  ForegroundMask mask(kCanvas, kCanvas);
  for (int sy = 0; sy < kGlyphBox; ++sy) {
    for (int sx = 0; sx < kGlyphBox; ++sx) {
      if (shape_contains(glyph_pattern, sy, sx)) {
        mask.set(offset_y + sy, offset_x + sx, true);
      }
    }
  }
  return mask;
}

std::shared_ptr<ToyBackend> ToyBackend::with_corrupted_gradients() const {
  auto copy = std::make_shared<ToyBackend>(*this);
  copy->corrupt_gradients_ = true;
  return copy;
}

ToyWorld build_toy_world(const ToyWorldSpec& spec) {
  auto backend = std::make_shared<ToyBackend>(spec);
  const auto& resolved = backend->spec();

  // Deterministic group plan: each class puts round(rho * n_k) samples on its
  // associated background and spreads the rest round-robin over the others.
  const int num_classes = resolved.num_classes;
  const int num_backgrounds = resolved.num_backgrounds;
  std::vector<std::pair<int, int>> plan;
  for (int k = 0; k < num_classes; ++k) {
    const int n_k = resolved.num_test_images / num_classes +
                    (k < resolved.num_test_images % num_classes ? 1 : 0);
    const int assoc = k % num_backgrounds;
    int n_assoc = static_cast<int>(std::lround(resolved.group_correlation * n_k));
    if (num_backgrounds == 1) n_assoc = n_k;
    n_assoc = std::min(n_assoc, n_k);
    for (int i = 0; i < n_assoc; ++i) plan.emplace_back(k, assoc);
    int other = 0;
    for (int i = n_assoc; i < n_k; ++i) {
      int b = other % (num_backgrounds - 1);
      b = b >= assoc ? b + 1 : b;
      plan.emplace_back(k, b);
      ++other;
    }
  }
  Rng order_rng(derive_seed(resolved.seed, "toy-order"));
  order_rng.shuffle(plan);

  ToyWorld world;
  world.model = backend;
  world.labels = backend->labels();
  const int jitter_lo = 4;
  const int jitter_hi = ToyBackend::kCanvas - ToyBackend::kGlyphBox - 4;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    char id_buf[24];
    std::snprintf(id_buf, sizeof(id_buf), "s%04zu", i);
    ToySample sample;
    sample.id = id_buf;
    sample.class_index = plan[i].first;
    sample.background_index = plan[i].second;
    sample.label = world.labels[sample.class_index];
    sample.group = sample.label + "_on_" +
                   backend->texture_names()[sample.background_index];
    Rng rng(derive_seed(resolved.seed, "toy-sample", sample.id));
    const int oy = rng.uniform_int(jitter_lo, jitter_hi);
    const int ox = rng.uniform_int(jitter_lo, jitter_hi);
    sample.image = backend->compose_image(sample.class_index,
                                          sample.background_index, oy, ox,
                                          kNoiseAmp, rng);
    sample.mask = backend->glyph_mask(sample.class_index, oy, ox);
    world.samples.push_back(std::move(sample));
  }
  return world;
}

}  // namespace seraser
