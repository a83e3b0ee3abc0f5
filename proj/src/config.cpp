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

#include "seraser/config.hpp"

#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "seraser/errors.hpp"
#include "seraser/io.hpp"
#include "seraser/rng.hpp"

namespace seraser {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ParseError("config field " + path + ": " + message);
}

void expect_object(const json& value, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  if (!value.is_object()) fail(path, "expected an object");
  for (const auto& [key, unused] : value.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) fail(path + "." + key, "unknown key");
  }
}

template <typename T>
void read_field(const json& obj, const std::string& path, const char* key,
                T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

void read_augment(const json& obj, const std::string& path, AugmentPolicy& out) {
  if (!obj.contains("augment")) return;
  const auto& a = obj.at("augment");
  const std::string apath = path + ".augment";
  expect_object(a, apath, {"ops_per_view", "magnitude", "allowed_ops"});
  read_field(a, apath, "ops_per_view", out.ops_per_view);
  read_field(a, apath, "magnitude", out.magnitude);
  if (a.contains("allowed_ops")) {
    if (!a.at("allowed_ops").is_array()) fail(apath + ".allowed_ops", "expected array");
    out.allowed_ops.clear();
    for (const auto& name : a.at("allowed_ops")) {
      try {
        out.allowed_ops.push_back(augment_op_from_string(name.get<std::string>()));
      } catch (const std::exception& e) {
        fail(apath + ".allowed_ops", e.what());
      }
    }
  }
}

json augment_to_json(const AugmentPolicy& policy) {
  json ops = json::array();
  for (auto op : policy.allowed_ops) ops.push_back(to_string(op));
  return {{"ops_per_view", policy.ops_per_view},
          {"magnitude", policy.magnitude},
          {"allowed_ops", ops}};
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kVanilla:
      return "vanilla";
    case Method::kMask:
      return "mask";
    case Method::kTpt:
      return "tpt";
    case Method::kSeraser:
      return "seraser";
  }
  throw std::invalid_argument("unknown method");
}

Method method_from_string(const std::string& name) {
  if (name == "vanilla") return Method::kVanilla;
  if (name == "mask") return Method::kMask;
  if (name == "tpt") return Method::kTpt;
  if (name == "seraser") return Method::kSeraser;
  throw std::invalid_argument("unknown method: " + name +
                              " (expected vanilla|mask|tpt|seraser)");
}

void RunConfig::validate() const {
  if (backend != "toy" && backend.rfind("adapter:", 0) != 0) {
    throw std::invalid_argument("model.backend must be \"toy\" or \"adapter:<name>\"");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("model.temperature must be positive");
  }
  toy.validate();
  eraser.validate();
  tpt.validate();
  if (parallelism < 1) {
    throw std::invalid_argument("eval.parallelism must be >= 1");
  }
}

void RunConfig::resolve_seeds(bool eraser_seed_set, bool tpt_seed_set) {
  if (!eraser_seed_set) eraser.seed = derive_seed(seed, "eraser");
  if (!tpt_seed_set) tpt.seed = derive_seed(seed, "tpt");
}

RunConfig default_run_config() {
  RunConfig config;
  config.resolve_seeds(false, false);
  return config;
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  expect_object(root, origin, {"model", "eraser", "tpt", "eval", "output"});

  RunConfig config;
  bool eraser_seed_set = false;
  bool tpt_seed_set = false;

  if (root.contains("model")) {
    const auto& m = root.at("model");
    expect_object(m, "model", {"backend", "temperature", "toy"});
    read_field(m, "model", "backend", config.backend);
    read_field(m, "model", "temperature", config.temperature);
    if (m.contains("toy")) {
      const auto& t = m.at("toy");
      expect_object(t, "model.toy",
                    {"num_classes", "num_backgrounds", "glyph_patterns",
                     "texture_patterns", "class_names", "texture_names",
                     "shortcut_strength", "group_correlation",
                     "num_test_images", "seed"});
      read_field(t, "model.toy", "num_classes", config.toy.num_classes);
      read_field(t, "model.toy", "num_backgrounds", config.toy.num_backgrounds);
      read_field(t, "model.toy", "glyph_patterns", config.toy.glyph_patterns);
      read_field(t, "model.toy", "texture_patterns", config.toy.texture_patterns);
      read_field(t, "model.toy", "class_names", config.toy.class_names);
      read_field(t, "model.toy", "texture_names", config.toy.texture_names);
      read_field(t, "model.toy", "shortcut_strength", config.toy.shortcut_strength);
      read_field(t, "model.toy", "group_correlation", config.toy.group_correlation);
      read_field(t, "model.toy", "num_test_images", config.toy.num_test_images);
      read_field(t, "model.toy", "seed", config.toy.seed);
    }
  }

  if (root.contains("eraser")) {
    const auto& e = root.at("eraser");
    expect_object(e, "eraser",
                  {"steps", "learning_rate", "erase_weight", "keep_weight",
                   "keep_views", "augment", "strategies", "random_patch_count",
                   "reference_count", "reference_pool", "seed"});
    read_field(e, "eraser", "steps", config.eraser.steps);
    read_field(e, "eraser", "learning_rate", config.eraser.learning_rate);
    read_field(e, "eraser", "erase_weight", config.eraser.erase_weight);
    read_field(e, "eraser", "keep_weight", config.eraser.keep_weight);
    read_field(e, "eraser", "keep_views", config.eraser.keep_views);
    read_augment(e, "eraser", config.eraser.augment);
    if (e.contains("strategies")) {
      if (!e.at("strategies").is_array()) fail("eraser.strategies", "expected array");
      config.eraser.strategies.clear();
      for (const auto& name : e.at("strategies")) {
        try {
          config.eraser.strategies.push_back(
              aux_strategy_from_string(name.get<std::string>()));
        } catch (const std::exception& ex) {
          fail("eraser.strategies", ex.what());
        }
      }
    }
    read_field(e, "eraser", "random_patch_count", config.eraser.random_patch_count);
    read_field(e, "eraser", "reference_count", config.eraser.reference_count);
    if (e.contains("reference_pool") && !e.at("reference_pool").is_null()) {
      config.reference_pool = e.at("reference_pool").get<std::string>();
    }
    if (e.contains("seed")) {
      read_field(e, "eraser", "seed", config.eraser.seed);
      eraser_seed_set = true;
    }
  }

  if (root.contains("tpt")) {
    const auto& t = root.at("tpt");
    expect_object(t, "tpt",
                  {"num_views", "confidence_fraction", "steps", "learning_rate",
                   "augment", "seed"});
    read_field(t, "tpt", "num_views", config.tpt.num_views);
    read_field(t, "tpt", "confidence_fraction", config.tpt.confidence_fraction);
    read_field(t, "tpt", "steps", config.tpt.steps);
    read_field(t, "tpt", "learning_rate", config.tpt.learning_rate);
    read_augment(t, "tpt", config.tpt.augment);
    if (t.contains("seed")) {
      read_field(t, "tpt", "seed", config.tpt.seed);
      tpt_seed_set = true;
    }
  }

  if (root.contains("eval")) {
    const auto& ev = root.at("eval");
    expect_object(ev, "eval",
                  {"manifest", "method", "skip_errors", "parallelism", "seed"});
    if (ev.contains("manifest")) {
      config.manifest = ev.at("manifest").get<std::string>();
    }
    if (ev.contains("method")) {
      try {
        config.method = method_from_string(ev.at("method").get<std::string>());
      } catch (const std::exception& e) {
        fail("eval.method", e.what());
      }
    }
    read_field(ev, "eval", "skip_errors", config.skip_errors);
    read_field(ev, "eval", "parallelism", config.parallelism);
    read_field(ev, "eval", "seed", config.seed);
  }

  if (root.contains("output")) {
    const auto& o = root.at("output");
    expect_object(o, "output", {"report"});
    if (o.contains("report")) {
      config.report_path = o.at("report").get<std::string>();
    }
  }

  if (const char* env_seed = std::getenv("SERASER_SEED")) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env_seed, &end, 10);
    if (end == env_seed || *end != '\0') {
      throw ParseError("SERASER_SEED must be an unsigned integer, got: " +
                       std::string(env_seed));
    }
    config.seed = value;
    // Derived section seeds follow the overridden run seed.
    eraser_seed_set = false;
    tpt_seed_set = false;
  }

  config.resolve_seeds(eraser_seed_set, tpt_seed_set);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path), path.string());
}

std::string run_config_to_json(const RunConfig& config) {
  json strategies = json::array();
  for (auto s : config.eraser.strategies) strategies.push_back(to_string(s));
  json root = {
      {"model",
       {{"backend", config.backend},
        {"temperature", config.temperature},
        {"toy",
         {{"num_classes", config.toy.num_classes},
          {"num_backgrounds", config.toy.num_backgrounds},
          {"glyph_patterns", config.toy.glyph_patterns},
          {"texture_patterns", config.toy.texture_patterns},
          {"class_names", config.toy.class_names},
          {"texture_names", config.toy.texture_names},
          {"shortcut_strength", config.toy.shortcut_strength},
          {"group_correlation", config.toy.group_correlation},
          {"num_test_images", config.toy.num_test_images},
          {"seed", config.toy.seed}}}}},
      {"eraser",
       {{"steps", config.eraser.steps},
        {"learning_rate", config.eraser.learning_rate},
        {"erase_weight", config.eraser.erase_weight},
        {"keep_weight", config.eraser.keep_weight},
        {"keep_views", config.eraser.keep_views},
        {"augment", augment_to_json(config.eraser.augment)},
        {"strategies", strategies},
        {"random_patch_count", config.eraser.random_patch_count},
        {"reference_count", config.eraser.reference_count},
        {"reference_pool",
         config.reference_pool ? json(config.reference_pool->string()) : json()},
        {"seed", config.eraser.seed}}},
      {"tpt",
       {{"num_views", config.tpt.num_views},
        {"confidence_fraction", config.tpt.confidence_fraction},
        {"steps", config.tpt.steps},
        {"learning_rate", config.tpt.learning_rate},
        {"augment", augment_to_json(config.tpt.augment)},
        {"seed", config.tpt.seed}}},
      {"eval",
       {{"manifest", config.manifest.string()},
        {"method", to_string(config.method)},
        {"skip_errors", config.skip_errors},
        {"parallelism", config.parallelism},
        {"seed", config.seed}}},
      {"output", {{"report", config.report_path.string()}}}};
  return root.dump(2);
}

std::string config_fingerprint(const RunConfig& config) {
  // Parallelism and the report destination cannot change any prediction, so
  // they are normalized out: a 4-thread run fingerprints like a serial one.
  RunConfig canonical_config = config;
  canonical_config.parallelism = 1;
  canonical_config.report_path = "";
  const std::string canonical = run_config_to_json(canonical_config);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  return buf;
}

}  // namespace seraser
