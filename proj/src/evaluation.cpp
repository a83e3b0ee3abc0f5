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

#include "seraser/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "seraser/baselines.hpp"
#include "seraser/errors.hpp"
#include "seraser/io.hpp"

namespace seraser {

namespace {

using nlohmann::json;

json diagnostics_to_json(const AdaptationDiagnostics& d) {
  json trace = json::array();
  for (const auto& step : d.trace) {
    trace.push_back(
        {{"total", step.total}, {"erase", step.erase}, {"keep", step.keep}});
  }
  return {{"initial_loss", d.initial_loss},
          {"final_loss", d.final_loss},
          {"steps", d.steps},
          {"strategies", d.strategies_used},
          {"trace", trace}};
}

AdaptationDiagnostics diagnostics_from_json(const json& j, const std::string& where) {
  AdaptationDiagnostics d;
  for (const auto& [key, unused] : j.items()) {
    if (key != "initial_loss" && key != "final_loss" && key != "steps" &&
        key != "strategies" && key != "trace") {
      throw ParseError(where + ".diagnostics." + key + ": unknown field");
    }
  }
  d.initial_loss = j.at("initial_loss").get<double>();
  d.final_loss = j.at("final_loss").get<double>();
  d.steps = j.at("steps").get<int>();
  d.strategies_used = j.at("strategies").get<std::vector<std::string>>();
  for (const auto& step : j.at("trace")) {
    d.trace.push_back({step.at("total").get<double>(),
                       step.at("erase").get<double>(),
                       step.at("keep").get<double>()});
  }
  return d;
}

std::vector<Image> load_reference_pool(const RunConfig& config) {
  std::vector<Image> pool;
  if (!config.reference_pool) return pool;
  for (const auto& entry : read_manifest(*config.reference_pool)) {
    pool.push_back(read_png(entry.image_path));
  }
  return pool;
}

bool needs_reference_pool(const RunConfig& config) {
  return std::find(config.eraser.strategies.begin(), config.eraser.strategies.end(),
                   AuxStrategy::kReference) != config.eraser.strategies.end();
}

}  // namespace

std::vector<GroupedSample> read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto base = path.parent_path();
  std::vector<GroupedSample> samples;
  std::set<std::string> ids;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!row.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, unused] : row.items()) {
      if (key != "id" && key != "image" && key != "label" && key != "group" &&
          key != "mask") {
        throw ParseError(where + ": unknown key \"" + key + "\"");
      }
    }
    GroupedSample sample;
    try {
      sample.id = row.at("id").get<std::string>();
      sample.image_path = base / row.at("image").get<std::string>();
      sample.label = row.at("label").get<std::string>();
      sample.group = row.at("group").get<std::string>();
      if (row.contains("mask") && !row.at("mask").is_null()) {
        sample.mask_path = base / row.at("mask").get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (sample.group.empty()) throw ParseError(where + ": group must be non-empty");
    if (!ids.insert(sample.id).second) {
      throw ParseError(where + ": duplicate sample id \"" + sample.id + "\"");
    }
    samples.push_back(std::move(sample));
  }
  if (samples.empty()) {
    throw ParseError(path.string() + ": manifest is empty");
  }
  return samples;
}

ModelHandle build_backend(const RunConfig& config) {
  if (config.backend == "toy") {
    return std::make_shared<ToyBackend>(config.toy);
  }
  throw UnsupportedOperationError(
      "backend \"" + config.backend +
      "\" is not available in-tree; adapters are external plugins");
}

GroupReport evaluate(Method method, const std::vector<GroupedSample>& manifest,
                     const RunConfig& config) {
  if (manifest.empty()) throw std::invalid_argument("manifest is empty");
  RunConfig resolved = config;
  resolved.method = method;
  resolved.validate();

  const ModelHandle model = build_backend(resolved);
  const PromptContext prompt = model->default_prompt(resolved.seed);
  const auto model_labels = model->labels();

  std::vector<Image> pool;
  if (method == Method::kSeraser && needs_reference_pool(resolved)) {
    pool = load_reference_pool(resolved);
  }

  std::vector<SampleOutcome> outcomes(manifest.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= manifest.size()) return;
      const auto& entry = manifest[i];
      SampleOutcome& out = outcomes[i];
      out.id = entry.id;
      out.label = entry.label;
      out.group = entry.group;
      try {
        if (std::find(model_labels.begin(), model_labels.end(), entry.label) ==
            model_labels.end()) {
          throw std::invalid_argument("label \"" + entry.label +
                                      "\" is not in the model label set");
        }
        const Image image = read_png(entry.image_path);
        std::optional<ForegroundMask> mask;
        if (entry.mask_path) mask = read_mask_png(*entry.mask_path);

        switch (method) {
          case Method::kVanilla:
            out.predicted =
                vanilla_predict(*model, prompt, image, resolved.temperature);
            break;
          case Method::kMask: {
            if (!mask) {
              throw StrategyUnavailableError("method mask needs a mask for sample " +
                                             entry.id);
            }
            out.predicted =
                mask_predict(*model, prompt, image, *mask, resolved.temperature);
            break;
          }
          case Method::kTpt:
            out.predicted = tpt_predict(*model, prompt, image, resolved.tpt,
                                        resolved.temperature, entry.id);
            break;
          case Method::kSeraser: {
            AdaptationSession session(model, prompt, resolved.eraser,
                                      resolved.temperature, entry.id);
            auto result = session.predict_with_adaptation(
                SampleInput{image, mask, pool});
            out.predicted = result.predicted_label;
            out.diagnostics = std::move(result.diagnostics);
            break;
          }
        }
        out.correct = out.predicted == entry.label;
      } catch (const std::exception& e) {
        out.errored = true;
        out.error = e.what();
      }
    }
  };

  const int threads = std::min<int>(resolved.parallelism,
                                    static_cast<int>(manifest.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (int t = 0; t < threads; ++t) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }

  if (!resolved.skip_errors) {
    for (const auto& out : outcomes) {
      if (out.errored) {
        throw std::runtime_error("sample " + out.id + " failed: " + out.error);
      }
    }
  }

  GroupReport report;
  report.method = to_string(method);
  report.seed = resolved.seed;
  report.config_fingerprint = config_fingerprint(resolved);
  for (const auto& out : outcomes) {
    if (out.errored) continue;
    auto& stats = report.per_group[out.group];
    stats.total += 1;
    stats.correct += out.correct ? 1 : 0;
  }
  int total = 0;
  int correct = 0;
  double worst = 1.0;
  for (auto& [group, stats] : report.per_group) {
    stats.accuracy = static_cast<double>(stats.correct) / stats.total;
    total += stats.total;
    correct += stats.correct;
    worst = std::min(worst, stats.accuracy);
  }
  if (total == 0) {
    throw std::runtime_error("every sample errored; nothing to aggregate");
  }
  report.n = total;
  report.avg_accuracy = static_cast<double>(correct) / total;
  report.worst_group_accuracy = worst;
  report.samples = std::move(outcomes);
  std::sort(report.samples.begin(), report.samples.end(),
            [](const SampleOutcome& a, const SampleOutcome& b) { return a.id < b.id; });
  return report;
}

void write_report(const GroupReport& report, const std::filesystem::path& path) {
  json groups = json::object();
  for (const auto& [group, stats] : report.per_group) {
    groups[group] = {{"correct", stats.correct},
                     {"total", stats.total},
                     {"accuracy", stats.accuracy}};
  }
  json samples = json::array();
  for (const auto& out : report.samples) {
    json row = {{"id", out.id},         {"label", out.label},
                {"group", out.group},   {"predicted", out.predicted},
                {"correct", out.correct}, {"errored", out.errored},
                {"error", out.error}};
    if (out.diagnostics) row["diagnostics"] = diagnostics_to_json(*out.diagnostics);
    samples.push_back(std::move(row));
  }
  const json root = {{"schema_version", report.schema_version},
                     {"method", report.method},
                     {"per_group", groups},
                     {"avg_accuracy", report.avg_accuracy},
                     {"worst_group_accuracy", report.worst_group_accuracy},
                     {"n", report.n},
                     {"seed", report.seed},
                     {"config_fingerprint", report.config_fingerprint},
                     {"samples", samples}};
  write_text_file_atomic(path, root.dump(2) + "\n");
}

GroupReport read_report(const std::filesystem::path& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  if (!root.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, unused] : root.items()) {
    if (key != "schema_version" && key != "method" && key != "per_group" &&
        key != "avg_accuracy" && key != "worst_group_accuracy" && key != "n" &&
        key != "seed" && key != "config_fingerprint" && key != "samples") {
      throw ParseError(where + ": unknown field \"" + key + "\"");
    }
  }
  GroupReport report;
  try {
    report.schema_version = root.at("schema_version").get<std::string>();
    if (report.schema_version != "1") {
      throw ParseError(where + ": unsupported schema_version " +
                       report.schema_version);
    }
    report.method = root.at("method").get<std::string>();
    for (const auto& [group, stats] : root.at("per_group").items()) {
      for (const auto& [key, unused] : stats.items()) {
        if (key != "correct" && key != "total" && key != "accuracy") {
          throw ParseError(where + ": unknown field per_group." + group + "." + key);
        }
      }
      report.per_group[group] = {stats.at("correct").get<int>(),
                                 stats.at("total").get<int>(),
                                 stats.at("accuracy").get<double>()};
    }
    report.avg_accuracy = root.at("avg_accuracy").get<double>();
    report.worst_group_accuracy = root.at("worst_group_accuracy").get<double>();
    report.n = root.at("n").get<int>();
    report.seed = root.at("seed").get<std::uint64_t>();
    report.config_fingerprint = root.at("config_fingerprint").get<std::string>();
    for (const auto& row : root.at("samples")) {
      for (const auto& [key, unused] : row.items()) {
        if (key != "id" && key != "label" && key != "group" && key != "predicted" &&
            key != "correct" && key != "errored" && key != "error" &&
            key != "diagnostics") {
          throw ParseError(where + ": unknown sample field \"" + key + "\"");
        }
      }
      SampleOutcome out;
      out.id = row.at("id").get<std::string>();
      out.label = row.at("label").get<std::string>();
      out.group = row.at("group").get<std::string>();
      out.predicted = row.at("predicted").get<std::string>();
      out.correct = row.at("correct").get<bool>();
      out.errored = row.at("errored").get<bool>();
      out.error = row.at("error").get<std::string>();
      if (row.contains("diagnostics")) {
        out.diagnostics = diagnostics_from_json(row.at("diagnostics"),
                                                where + ".samples." + out.id);
      }
      report.samples.push_back(std::move(out));
    }
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  return report;
}

std::vector<std::string> select_hard_subset(const ModelBackend& m,
                                            const PromptContext& prompt,
                                            const std::vector<GroupedSample>& manifest,
                                            double temperature,
                                            int total_classes) {
  if (total_classes < 2) {
    throw std::invalid_argument("total_classes must be >= 2");
  }
  const auto labels = m.labels();
  auto label_index = [&](const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw std::invalid_argument("label \"" + label +
                                  "\" is not in the model label set");
    }
    return static_cast<int>(it - labels.begin());
  };

  const int k = static_cast<int>(labels.size());
  std::vector<int> per_class_total(k, 0);
  std::vector<int> per_class_correct(k, 0);
  std::vector<std::vector<int>> confusion(k, std::vector<int>(k, 0));
  for (const auto& entry : manifest) {
    const int truth = label_index(entry.label);
    const Image image = read_png(entry.image_path);
    const int predicted =
        label_index(vanilla_predict(m, prompt, image, temperature));
    per_class_total[truth] += 1;
    per_class_correct[truth] += predicted == truth ? 1 : 0;
    confusion[truth][predicted] += 1;
  }

  std::vector<int> present;
  for (int c = 0; c < k; ++c) {
    if (per_class_total[c] > 0) present.push_back(c);
  }
  if (static_cast<int>(present.size()) < total_classes) {
    throw std::invalid_argument(
        "manifest covers " + std::to_string(present.size()) +
        " classes, need at least " + std::to_string(total_classes));
  }

  // Worst-first ordering; accuracy ties resolved by class index.
  std::vector<int> by_badness = present;
  std::sort(by_badness.begin(), by_badness.end(), [&](int a, int b) {
    const double acc_a = static_cast<double>(per_class_correct[a]) / per_class_total[a];
    const double acc_b = static_cast<double>(per_class_correct[b]) / per_class_total[b];
    if (acc_a != acc_b) return acc_a < acc_b;
    return a < b;
  });

  std::vector<int> chosen;
  auto add = [&](int c) {
    if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) {
      chosen.push_back(c);
    }
  };
  const int num_seeds = std::min<int>(5, static_cast<int>(by_badness.size()));
  for (int i = 0; i < num_seeds; ++i) add(by_badness[i]);
  for (int i = 0; i < num_seeds; ++i) {
    const int seed_class = by_badness[i];
    int partner = -1;
    int best = -1;
    for (int c = 0; c < k; ++c) {
      if (c == seed_class) continue;
      if (confusion[seed_class][c] > best) {
        best = confusion[seed_class][c];
        partner = c;
      }
    }
    if (partner >= 0) add(partner);
  }
  for (int c : by_badness) {
    if (static_cast<int>(chosen.size()) >= total_classes) break;
    add(c);
  }
  chosen.resize(total_classes);

  std::vector<std::string> result;
  for (int c : chosen) result.push_back(labels[c]);
  return result;
}

std::filesystem::path materialize_toy_world(const ToyWorld& world,
                                            const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  fs::create_directories(out_dir / "masks", ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::ostringstream manifest;
  for (const auto& sample : world.samples) {
    const std::string image_rel = "images/" + sample.id + ".png";
    const std::string mask_rel = "masks/" + sample.id + ".png";
    write_png(out_dir / image_rel, sample.image);
    write_mask_png(out_dir / mask_rel, sample.mask);
    const json row = {{"id", sample.id},
                      {"image", image_rel},
                      {"label", sample.label},
                      {"group", sample.group},
                      {"mask", mask_rel}};
    manifest << row.dump() << "\n";
  }
  const auto manifest_path = out_dir / "manifest.jsonl";
  write_text_file_atomic(manifest_path, manifest.str());
  return manifest_path;
}

}  // namespace seraser
