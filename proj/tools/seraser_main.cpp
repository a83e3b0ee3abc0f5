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

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "seraser/config.hpp"
#include "seraser/errors.hpp"
#include "seraser/evaluation.hpp"
#include "seraser/gradcheck.hpp"
#include "seraser/io.hpp"
#include "seraser/s2e.hpp"

namespace {

using namespace seraser;

RunConfig load_config_or_default(const std::string& config_path) {
  if (config_path.empty()) return parse_run_config("{}", "<defaults>");
  return load_run_config(config_path);
}

struct EvalArgs {
  std::string config_path;
  std::string manifest;
  std::string method;
  std::string out;
  std::string seed;
  int parallelism = 0;
  bool skip_errors = false;
};

int cmd_eval(const EvalArgs& args) {
  RunConfig config = load_config_or_default(args.config_path);
  if (!args.manifest.empty()) config.manifest = args.manifest;
  if (!args.method.empty()) config.method = method_from_string(args.method);
  if (!args.out.empty()) config.report_path = args.out;
  if (!args.seed.empty()) {
    config.seed = std::stoull(args.seed);
    config.resolve_seeds(false, false);
  }
  if (args.parallelism > 0) config.parallelism = args.parallelism;
  if (args.skip_errors) config.skip_errors = true;
  if (config.manifest.empty()) {
    throw std::invalid_argument("eval needs a manifest (--manifest or eval.manifest)");
  }
  config.validate();

  const auto manifest = read_manifest(config.manifest);
  const GroupReport report = evaluate(config.method, manifest, config);
  write_report(report, config.report_path);

  std::printf("method %s  n %d  AVG %.4f  W.G. %.4f\n", report.method.c_str(),
              report.n, report.avg_accuracy, report.worst_group_accuracy);
  for (const auto& [group, stats] : report.per_group) {
    std::printf("  group %-28s %4d/%-4d  acc %.4f\n", group.c_str(),
                stats.correct, stats.total, stats.accuracy);
  }
  std::printf("report written to %s\n", config.report_path.string().c_str());
  return 0;
}

int cmd_gradcheck(const std::string& config_path, int pairs,
                  const std::string& seed_str, bool corrupt) {
  RunConfig config = load_config_or_default(config_path);
  if (!seed_str.empty()) config.seed = std::stoull(seed_str);
  if (config.backend != "toy") {
    throw UnsupportedOperationError(
        "gradcheck needs the toy backend (adapters expose no analytic gradients)");
  }
  auto backend = std::make_shared<ToyBackend>(config.toy);
  std::shared_ptr<const ToyBackend> checked = backend;
  if (corrupt) checked = backend->with_corrupted_gradients();

  const auto result = run_gradient_check(*checked, pairs, config.seed);
  std::printf("gradient check over %d pairs: max relative error %.3e\n", pairs,
              result.max_rel_error);
  const bool pass = result.max_rel_error <= 1e-5;
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_toyworld(const std::string& config_path, const std::string& out_dir,
                 const std::string& seed_str) {
  RunConfig config = load_config_or_default(config_path);
  if (!seed_str.empty()) config.toy.seed = std::stoull(seed_str);
  config.toy.validate();

  const ToyWorld world = build_toy_world(config.toy);
  const auto manifest_path = materialize_toy_world(world, out_dir);

  std::map<std::string, int> group_counts;
  for (const auto& sample : world.samples) group_counts[sample.group] += 1;
  std::printf("toy world: %zu samples, %zu groups, model fingerprint %s\n",
              world.samples.size(), group_counts.size(),
              world.model->fingerprint().c_str());
  for (const auto& [group, count] : group_counts) {
    std::printf("  group %-28s %d samples\n", group.c_str(), count);
  }
  std::printf("manifest written to %s\n", manifest_path.string().c_str());
  return 0;
}

int cmd_s2e_build(const S2eBuildOptions& options) {
  const auto summary = s2e_build(options);
  std::printf("s2e build: generated %d, kept %d, rejected %d\n", summary.generated,
              summary.kept, summary.rejected);
  std::printf("manifest written to %s\n", summary.manifest_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seraser: test-time prompt tuning against background decision shortcuts"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Evaluate a method over a grouped manifest and write a report");
  eval_cmd->add_option("--config", eval_args.config_path, "JSON config file");
  eval_cmd->add_option("--manifest", eval_args.manifest,
                       "JSONL manifest (overrides eval.manifest)");
  eval_cmd->add_option("--method", eval_args.method,
                       "vanilla|mask|tpt|seraser (overrides eval.method)")
      ->check(CLI::IsMember({"vanilla", "mask", "tpt", "seraser"}));
  eval_cmd->add_option("--out", eval_args.out, "report path (default report.json)");
  eval_cmd->add_option("--seed", eval_args.seed,
                       "run seed; section seeds re-derive from it");
  eval_cmd->add_option("--parallelism", eval_args.parallelism,
                       "worker threads (default 1; output is identical at any value)");
  eval_cmd->add_flag("--skip-errors", eval_args.skip_errors,
                     "record failing samples and exclude them instead of aborting");

  std::string gc_config;
  std::string gc_seed;
  int gc_pairs = 50;
  bool gc_corrupt = false;
  auto* gc_cmd = app.add_subcommand(
      "gradcheck", "Finite-difference check of the toy backend prompt gradients");
  gc_cmd->add_option("--config", gc_config, "JSON config file");
  gc_cmd->add_option("--pairs", gc_pairs, "number of (prompt, sample) pairs")
      ->capture_default_str();
  gc_cmd->add_option("--seed", gc_seed, "run seed");
  gc_cmd->add_flag("--corrupt-gradient", gc_corrupt,
                   "negative-control hook: perturb the analytic gradient");

  std::string tw_config;
  std::string tw_out;
  std::string tw_seed;
  auto* tw_cmd = app.add_subcommand(
      "toyworld", "Materialize the planted-shortcut toy dataset");
  tw_cmd->add_option("--config", tw_config, "JSON config file");
  tw_cmd->add_option("--out", tw_out, "output directory")->required();
  tw_cmd->add_option("--seed", tw_seed, "toy world seed (overrides model.toy.seed)");

  S2eBuildOptions s2e_options;
  std::string s2e_pairs;
  std::string s2e_out;
  auto* s2e_cmd = app.add_subcommand("s2e", "Shortcut-to-evaluate dataset tools");
  auto* s2e_build_cmd = s2e_cmd->add_subcommand(
      "build", "Generate, filter and emit a context-swapped dataset");
  s2e_build_cmd->add_option("--pairs", s2e_pairs, "class pairs JSON file")->required();
  s2e_build_cmd->add_option("--client", s2e_options.client,
                            "generator client: stub|plugin:<name>")
      ->capture_default_str();
  s2e_build_cmd->add_option("--count", s2e_options.count,
                            "images per generation request")
      ->capture_default_str();
  s2e_build_cmd->add_option("--threshold", s2e_options.threshold,
                            "presence-filter keep threshold in (0, 1]")
      ->capture_default_str();
  s2e_build_cmd->add_option("--decoy-fraction", s2e_options.decoy_fraction,
                            "stub only: fraction of glyph-free decoy generations")
      ->capture_default_str();
  s2e_build_cmd->add_option("--seed", s2e_options.seed, "pipeline seed")
      ->capture_default_str();
  s2e_build_cmd->add_option("--out", s2e_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_config, gc_pairs, gc_seed, gc_corrupt);
    if (tw_cmd->parsed()) return cmd_toyworld(tw_config, tw_out, tw_seed);
    if (s2e_cmd->parsed()) {
      if (!s2e_build_cmd->parsed()) {
        std::cerr << "error: s2e needs a subcommand (build)\n";
        return 1;
      }
      s2e_options.pairs_path = s2e_pairs;
      s2e_options.out_dir = s2e_out;
      return cmd_s2e_build(s2e_options);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
