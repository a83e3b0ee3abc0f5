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

#ifndef SERASER_EVALUATION_HPP_
#define SERASER_EVALUATION_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seraser/config.hpp"
#include "seraser/eraser.hpp"
#include "seraser/model.hpp"
#include "seraser/toy_backend.hpp"

namespace seraser {

// One manifest row. Paths are stored resolved (relative entries are taken
// against the manifest's directory).
struct GroupedSample {
  std::string id;
  std::filesystem::path image_path;
  std::string label;
  std::string group;
  std::optional<std::filesystem::path> mask_path;
};

// JSON Lines manifest: one object per line with keys
// {id, image, label, group, mask?}. Unknown keys are rejected.
std::vector<GroupedSample> read_manifest(const std::filesystem::path& path);

struct GroupStats {
  int correct = 0;
  int total = 0;
  double accuracy = 0.0;
};

struct SampleOutcome {
  std::string id;
  std::string label;
  std::string group;
  std::string predicted;
  bool correct = false;
  bool errored = false;
  std::string error;
  std::optional<AdaptationDiagnostics> diagnostics;
};

struct GroupReport {
  std::string schema_version = "1";
  std::string method;
  std::map<std::string, GroupStats> per_group;
  double avg_accuracy = 0.0;          // sample-weighted over evaluated samples
  double worst_group_accuracy = 0.0;  // min over per-group accuracy
  int n = 0;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  std::vector<SampleOutcome> samples;  // sorted by id
};

// Builds the backend named by the config. Only "toy" resolves in-tree;
// adapter:<name> backends are external plugins.
ModelHandle build_backend(const RunConfig& config);

// Runs `method` over every manifest sample and aggregates per group.
// Deterministic under (config, seed) and invariant to manifest order and
// parallelism. Per-sample failures abort with the sample id unless
// config.skip_errors, in which case they are recorded and excluded.
GroupReport evaluate(Method method, const std::vector<GroupedSample>& manifest,
                     const RunConfig& config);

// Report file round trip; schema-validated, unknown fields rejected.
void write_report(const GroupReport& report, const std::filesystem::path& path);
GroupReport read_report(const std::filesystem::path& path);

// Hard-subset rule: the five lowest-accuracy classes under vanilla
// zero-shot, each paired with the class it is most confused with, topped up
// with the next-worst classes until exactly total_classes labels.
std::vector<std::string> select_hard_subset(const ModelBackend& m,
                                            const PromptContext& prompt,
                                            const std::vector<GroupedSample>& manifest,
                                            double temperature,
                                            int total_classes = 10);

// Writes images/, masks/ and manifest.jsonl under out_dir; returns the
// manifest path. Rerunning with the same world is byte-identical.
std::filesystem::path materialize_toy_world(const ToyWorld& world,
                                            const std::filesystem::path& out_dir);

}  // namespace seraser

#endif  // SERASER_EVALUATION_HPP_
