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

#ifndef SERASER_CONFIG_HPP_
#define SERASER_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "seraser/baselines.hpp"
#include "seraser/eraser.hpp"
#include "seraser/toy_backend.hpp"

namespace seraser {

enum class Method { kVanilla, kMask, kTpt, kSeraser };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

// The full run configuration. Every field has a default; unknown keys in a
// config file are rejected with their path. Section seeds left unset derive
// from the run seed.
struct RunConfig {
  // model section
  std::string backend = "toy";  // "toy" | "adapter:<name>"
  double temperature = 0.01;
  ToyWorldSpec toy;

  // eraser section
  EraserConfig eraser;
  std::optional<std::filesystem::path> reference_pool;  // manifest of pool images

  // tpt section
  TptConfig tpt;

  // eval section
  std::filesystem::path manifest;
  Method method = Method::kVanilla;
  bool skip_errors = false;
  int parallelism = 1;
  std::uint64_t seed = 0;

  // output section
  std::filesystem::path report_path = "report.json";

  void validate() const;

  // Fills derived section seeds from the run seed. Call after overrides.
  void resolve_seeds(bool eraser_seed_set, bool tpt_seed_set);
};

RunConfig default_run_config();

// Parses a config file. The SERASER_SEED environment variable, when set,
// overrides the run seed (CLI flags override both, applied by the caller).
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& origin);

// Canonical serialization of the resolved config.
std::string run_config_to_json(const RunConfig& config);

// Stable hex fingerprint of the resolved config; any change, including the
// seed, changes it.
std::string config_fingerprint(const RunConfig& config);

}  // namespace seraser

#endif  // SERASER_CONFIG_HPP_
