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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "seraser/auxiliary.hpp"
#include "seraser/baselines.hpp"
#include "seraser/eraser.hpp"
#include "seraser/gradcheck.hpp"
#include "seraser/toy_backend.hpp"

namespace py = pybind11;

namespace {

using namespace seraser;

Image image_from_array(const py::array_t<double, py::array::c_style |
                                                     py::array::forcecast>& arr) {
  if (arr.ndim() != 3) {
    throw std::invalid_argument("image arrays must have shape (H, W, C)");
  }
  Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
            static_cast<int>(arr.shape(2)));
  std::copy(arr.data(), arr.data() + arr.size(), img.pixels.begin());
  return img;
}

py::array_t<double> image_to_array(const Image& img) {
  py::array_t<double> arr({img.height, img.width, img.channels});
  std::copy(img.pixels.begin(), img.pixels.end(), arr.mutable_data());
  return arr;
}

ForegroundMask mask_from_array(
    const py::array_t<std::uint8_t,
                      py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) {
    throw std::invalid_argument("mask arrays must have shape (H, W)");
  }
  ForegroundMask mask(static_cast<int>(arr.shape(0)),
                      static_cast<int>(arr.shape(1)));
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    mask.bits[i] = arr.data()[i] ? 1 : 0;
  }
  return mask;
}

py::array_t<std::uint8_t> mask_to_array(const ForegroundMask& mask) {
  py::array_t<std::uint8_t> arr({mask.height, mask.width});
  std::copy(mask.bits.begin(), mask.bits.end(), arr.mutable_data());
  return arr;
}

py::array_t<double> vec_to_array(const Vec& v) {
  py::array_t<double> arr(std::vector<py::ssize_t>{
      static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), arr.mutable_data());
  return arr;
}

PredictionDistribution distribution_from(const std::vector<double>& probs) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    labels.push_back("c" + std::to_string(i));
  }
  return PredictionDistribution(probs, labels);
}

std::vector<py::array_t<double>> images_to_list(const AuxiliaryImageSet& set) {
  std::vector<py::array_t<double>> out;
  for (const auto& img : set.images) out.push_back(image_to_array(img));
  return out;
}

// Toy backend plus the default prompt, wrapped for the notebook-level API.
class PyToyWorld {
 public:
  PyToyWorld(int num_classes, int num_backgrounds, double shortcut_strength,
             double group_correlation, int num_test_images, std::uint64_t seed,
             std::optional<std::vector<std::string>> class_names,
             std::optional<std::vector<std::string>> texture_names,
             double temperature)
      : temperature_(temperature) {
    ToyWorldSpec spec;
    spec.num_classes = num_classes;
    spec.num_backgrounds = num_backgrounds;
    spec.shortcut_strength = shortcut_strength;
    spec.group_correlation = group_correlation;
    spec.num_test_images = num_test_images;
    spec.seed = seed;
    if (class_names) spec.class_names = *class_names;
    if (texture_names) spec.texture_names = *texture_names;
    world_ = build_toy_world(spec);
    backend_ = std::static_pointer_cast<const ToyBackend>(world_.model);
    prompt_ = backend_->default_prompt(seed);
  }

  std::vector<std::string> labels() const { return world_.labels; }
  std::string fingerprint() const { return backend_->fingerprint(); }
  std::size_t size() const { return world_.samples.size(); }

  py::dict sample(std::size_t index) const {
    if (index >= world_.samples.size()) {
      throw std::out_of_range("sample index out of range");
    }
    const auto& s = world_.samples[index];
    py::dict out;
    out["id"] = s.id;
    out["label"] = s.label;
    out["group"] = s.group;
    out["image"] = image_to_array(s.image);
    out["mask"] = mask_to_array(s.mask);
    return out;
  }

  py::array_t<double> encode_image(const py::array_t<
                                   double, py::array::c_style |
                                               py::array::forcecast>& arr) const {
    return vec_to_array(backend_->encode_image(image_from_array(arr)).values);
  }

  py::array_t<double> encode_text(int class_index) const {
    return vec_to_array(backend_->encode_text(prompt_, class_index).values);
  }

  std::string vanilla(const py::array_t<double, py::array::c_style |
                                                    py::array::forcecast>& arr)
      const {
    return vanilla_predict(*backend_, prompt_, image_from_array(arr), temperature_);
  }

  std::string masked(
      const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
      const py::array_t<std::uint8_t,
                        py::array::c_style | py::array::forcecast>& mask) const {
    return mask_predict(*backend_, prompt_, image_from_array(arr),
                        mask_from_array(mask), temperature_);
  }

  std::string tpt(
      const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
      int num_views, double confidence_fraction, int steps, double learning_rate,
      std::uint64_t seed, const std::string& sample_id) const {
    TptConfig config;
    config.num_views = num_views;
    config.confidence_fraction = confidence_fraction;
    config.steps = steps;
    config.learning_rate = learning_rate;
    config.seed = seed;
    return tpt_predict(*backend_, prompt_, image_from_array(arr), config,
                       temperature_, sample_id);
  }

  py::dict seraser(
      const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
      std::optional<py::array_t<std::uint8_t, py::array::c_style |
                                                  py::array::forcecast>> mask,
      int steps, double learning_rate, double erase_weight, double keep_weight,
      int keep_views, const std::vector<std::string>& strategies,
      std::uint64_t seed, const std::string& sample_id) const {
    EraserConfig config;
    config.steps = steps;
    config.learning_rate = learning_rate;
    config.erase_weight = erase_weight;
    config.keep_weight = keep_weight;
    config.keep_views = keep_views;
    config.strategies.clear();
    for (const auto& name : strategies) {
      config.strategies.push_back(aux_strategy_from_string(name));
    }
    config.seed = seed;

    SampleInput input;
    input.image = image_from_array(arr);
    if (mask) input.mask = mask_from_array(*mask);

    AdaptationSession session(backend_, prompt_, config, temperature_, sample_id);
    auto result = session.predict_with_adaptation(input);

    py::dict out;
    out["prediction"] = result.predicted_label;
    Vec prob_values(result.distribution.probs.begin(),
                    result.distribution.probs.end());
    out["probs"] = vec_to_array(prob_values);
    out["initial_loss"] = result.diagnostics.initial_loss;
    out["final_loss"] = result.diagnostics.final_loss;
    out["strategies"] = result.diagnostics.strategies_used;
    py::list trace;
    for (const auto& step : result.diagnostics.trace) {
      py::dict row;
      row["total"] = step.total;
      row["erase"] = step.erase;
      row["keep"] = step.keep;
      trace.append(row);
    }
    out["trace"] = trace;
    return out;
  }

  double gradient_check(int pairs, std::uint64_t seed) const {
    return run_gradient_check(*backend_, pairs, seed).max_rel_error;
  }

 private:
  ToyWorld world_;
  std::shared_ptr<const ToyBackend> backend_;
  PromptContext prompt_;
  double temperature_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "seraser: test-time prompt tuning against background decision "
            "shortcuts (C++ core bindings)";

  m.def(
      "softmax_from_similarities",
      [](const std::vector<double>& sims, double temperature) {
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < sims.size(); ++i) {
          labels.push_back("c" + std::to_string(i));
        }
        const auto p = softmax_from_similarities(
            SimilarityVector(sims, temperature, labels));
        return vec_to_array(p.probs);
      },
      py::arg("sims"), py::arg("temperature") = 0.01,
      "Temperature-scaled softmax over cosine similarities.");

  m.def(
      "kl_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return kl_divergence(distribution_from(p), distribution_from(q));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "kl_to_uniform",
      [](const std::vector<double>& p) { return kl_to_uniform(distribution_from(p)); },
      py::arg("p"));

  m.def(
      "entropy",
      [](const std::vector<double>& p) { return entropy(distribution_from(p)); },
      py::arg("p"));

  m.def(
      "argmax_index",
      [](const std::vector<double>& values) { return argmax_index(values); },
      py::arg("values"), "Index of the largest value; ties go to the lowest index.");

  m.def(
      "extract_background",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img,
         const py::array_t<std::uint8_t,
                           py::array::c_style | py::array::forcecast>& mask) {
        return image_to_array(
            extract_background(image_from_array(img), mask_from_array(mask))
                .images[0]);
      },
      py::arg("image"), py::arg("mask"));

  m.def(
      "extract_foreground",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img,
         const py::array_t<std::uint8_t,
                           py::array::c_style | py::array::forcecast>& mask) {
        return image_to_array(
            extract_foreground(image_from_array(img), mask_from_array(mask)));
      },
      py::arg("image"), py::arg("mask"));

  m.def(
      "corner_patches",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img) {
        return images_to_list(corner_patches(image_from_array(img)));
      },
      py::arg("image"));

  m.def(
      "random_patches",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img,
         int n, std::uint64_t seed) {
        return images_to_list(random_patches(image_from_array(img), n, seed));
      },
      py::arg("image"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "shuffle_patches",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img,
         std::uint64_t seed) {
        return image_to_array(
            shuffle_patches(image_from_array(img), seed).images[0]);
      },
      py::arg("image"), py::arg("seed") = 0);

  m.def(
      "augment_view",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& img,
         std::uint64_t seed, int view_index, int ops_per_view, int magnitude) {
        AugmentPolicy policy;
        policy.ops_per_view = ops_per_view;
        policy.magnitude = magnitude;
        return image_to_array(
            augment_view(image_from_array(img), policy, seed, view_index));
      },
      py::arg("image"), py::arg("seed") = 0, py::arg("view_index") = 0,
      py::arg("ops_per_view") = 2, py::arg("magnitude") = 9);

  py::class_<PyToyWorld>(m, "ToyWorld",
                         "Planted-shortcut toy world: a deterministic encoder "
                         "pair plus a grouped, masked test set.")
      .def(py::init<int, int, double, double, int, std::uint64_t,
                    std::optional<std::vector<std::string>>,
                    std::optional<std::vector<std::string>>, double>(),
           py::arg("num_classes") = 2, py::arg("num_backgrounds") = 2,
           py::arg("shortcut_strength") = 1.0, py::arg("group_correlation") = 0.95,
           py::arg("num_test_images") = 400, py::arg("seed") = 0,
           py::arg("class_names") = std::nullopt,
           py::arg("texture_names") = std::nullopt, py::arg("temperature") = 0.01)
      .def_property_readonly("labels", &PyToyWorld::labels)
      .def_property_readonly("fingerprint", &PyToyWorld::fingerprint)
      .def("__len__", &PyToyWorld::size)
      .def("sample", &PyToyWorld::sample, py::arg("index"))
      .def("encode_image", &PyToyWorld::encode_image, py::arg("image"))
      .def("encode_text", &PyToyWorld::encode_text, py::arg("class_index"))
      .def("vanilla_predict", &PyToyWorld::vanilla, py::arg("image"))
      .def("mask_predict", &PyToyWorld::masked, py::arg("image"), py::arg("mask"))
      .def("tpt_predict", &PyToyWorld::tpt, py::arg("image"),
           py::arg("num_views") = 32, py::arg("confidence_fraction") = 0.1,
           py::arg("steps") = 1, py::arg("learning_rate") = 5e-3,
           py::arg("seed") = 0, py::arg("sample_id") = "py")
      .def("seraser_predict", &PyToyWorld::seraser, py::arg("image"),
           py::arg("mask") = std::nullopt, py::arg("steps") = 8,
           py::arg("learning_rate") = 0.1, py::arg("erase_weight") = 1.0,
           py::arg("keep_weight") = 1.0, py::arg("keep_views") = 8,
           py::arg("strategies") =
               std::vector<std::string>{"annotation-background"},
           py::arg("seed") = 0, py::arg("sample_id") = "py")
      .def("gradient_check", &PyToyWorld::gradient_check, py::arg("pairs") = 5,
           py::arg("seed") = 0);

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
