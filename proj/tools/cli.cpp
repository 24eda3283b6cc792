// Copyright 2026 The fbseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbseg/errors.hpp"
#include "fbseg/evaluation.hpp"
#include "fbseg/inference.hpp"
#include "fbseg/manifest.hpp"
#include "fbseg/nifti.hpp"
#include "fbseg/phantom.hpp"
#include "fbseg/planner.hpp"
#include "fbseg/snapshot.hpp"
#include "fbseg/training.hpp"

namespace fbseg::cli {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::uint64_t seed = 42;
  bool seed_given = false;
  std::string verbosity = "info";
  int num_workers = 0;
};

struct PlanArgs {
  std::string patch_size = "448x512";
  int max_depth = kDefaultMaxDepth;
};

struct SynthArgs {
  std::size_t count = 1;
  std::string shape = "64x64x10";
  double noise = 0.1;
  fs::path out;
  std::optional<std::size_t> validation_count;
  std::size_t test_count = 0;
  std::string centre = "SYN";
};

struct TrainArgs {
  fs::path manifest;
  fs::path config;
  fs::path out;
};

struct InferArgs {
  fs::path model;
  fs::path input;
  fs::path output;
  fs::path prob;
  double threshold = 0.5;
  int connectivity = 26;
};

struct EvalArgs {
  fs::path pred;
  fs::path gt;
  std::string name = "method";
  fs::path out;
  double threshold = kOutlierThreshold;
};

struct CompareArgs {
  std::vector<fs::path> scores;
  std::vector<std::string> names;
  fs::path out;
  double threshold = kOutlierThreshold;
};

Shape3 parse_shape3(const std::string& text) {
  std::size_t dims[3] = {0, 0, 0};
  int field = 0;
  std::size_t pos = 0;
  while (field < 3) {
    const std::size_t next = text.find('x', pos);
    const std::string part = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("shape '" + text + "' is not of the form HxWxS");
    }
    dims[field++] = std::stoul(part);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (field != 3 || text.find('x', pos) != std::string::npos) {
    throw ConfigError("shape '" + text + "' is not of the form HxWxS");
  }
  return Shape3{dims[0], dims[1], dims[2]};
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'");
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

void configure_logging(const std::string& verbosity) {
  spdlog::drop("fbseg");
  auto logger = spdlog::stderr_color_st("fbseg");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(verbosity));
}

int cmd_plan(const GlobalOptions& g, const PlanArgs& a) {
  spdlog::info("plan: patch_size={} max_depth={} seed={}", a.patch_size, a.max_depth, g.seed);
  const NetPlan plan = plan_network(parse_extent2(a.patch_size), a.max_depth);
  std::cout << plan_to_json(plan);
  return kExitOk;
}

int cmd_synth(const GlobalOptions& g, const SynthArgs& a) {
  PhantomSpec spec;
  spec.count = a.count;
  spec.shape = parse_shape3(a.shape);
  spec.noise_level = a.noise;
  spec.seed = g.seed;
  spec.centre = a.centre;
  const std::size_t validation =
      a.validation_count.value_or(a.count >= 2 ? std::max<std::size_t>(1, a.count / 5) : 0);
  if (validation + a.test_count > a.count) {
    throw ConfigError("validation-count + test-count exceeds count");
  }
  spdlog::info("synth: count={} shape={} noise={} seed={} validation={} test={} out={}", spec.count,
               to_string(spec.shape), spec.noise_level, spec.seed, validation, a.test_count,
               a.out.string());
  const auto pairs = generate_phantoms(spec);

  ensure_directory(a.out / "images");
  ensure_directory(a.out / "masks");
  std::vector<ManifestEntry> entries;
  const std::size_t train_count = a.count - validation - a.test_count;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    const fs::path image = fs::path("images") / (pair.stack.identifier + ".nii.gz");
    const fs::path mask = fs::path("masks") / (pair.stack.identifier + ".nii.gz");
    save_stack(pair.stack, a.out / image);
    save_mask(pair.mask, pair.stack, a.out / mask);
    ManifestEntry e;
    e.image_path = image;
    e.mask_path = mask;
    e.split = i < train_count ? Split::kTrain
              : i < train_count + validation ? Split::kValidation
                                             : Split::kTest;
    e.centre = spec.centre;
    entries.push_back(std::move(e));
  }
  write_manifest(entries, a.out / "manifest.csv");
  spdlog::info("wrote {} pairs and manifest.csv to {}", pairs.size(), a.out.string());
  return kExitOk;
}

int cmd_train(const GlobalOptions& g, const TrainArgs& a) {
  TrainConfig config = a.config.empty() ? TrainConfig{} : load_config(a.config);
  if (g.seed_given) config.seed = g.seed;
  validate_config(config);
  const auto manifest = read_manifest(a.manifest);
  const NetPlan plan = plan_network(config.patch_size, config.max_depth);
  spdlog::info("train: seed={} workers={} manifest={} out={}", config.seed, g.num_workers,
               a.manifest.string(), a.out.string());
  spdlog::info("resolved config: {}", config_to_json(config));
  ensure_directory(a.out);
  write_file(a.out / "config.json", config_to_json(config));
  write_file(a.out / "plan.json", plan_to_json(plan));

  TrainOptions options;
  options.num_workers = g.num_workers;
  const auto start = std::chrono::steady_clock::now();
  options.on_record = [&](const HistoryRecord& r) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.val_dice) {
      spdlog::info("epoch {} validation dice {:.4f} ({:.1f}s)", r.epoch, *r.val_dice, secs);
    } else if (r.loss) {
      spdlog::debug("epoch {} iteration {} loss {:.6f} lr {:.6g}", r.epoch, r.iteration, *r.loss,
                    r.lr);
    }
  };
  const TrainResult result = train(manifest, plan, config, options);
  write_history_csv(result.history, a.out / "history.csv");
  save_snapshot(result.best, a.out / "best");
  save_snapshot(result.last, a.out / "last");
  spdlog::info("best snapshot: epoch {} validation dice {:.4f}", result.best.epoch,
               result.best.val_dice);
  return kExitOk;
}

int cmd_infer(const GlobalOptions& g, const InferArgs& a) {
  spdlog::info("infer: model={} input={} threshold={} connectivity={} seed={}", a.model.string(),
               a.input.string(), a.threshold, a.connectivity, g.seed);
  InferenceOptions options;
  options.threshold = a.threshold;
  options.connectivity = connectivity_from_int(a.connectivity);
  if (!(a.threshold > 0.0 && a.threshold < 1.0)) {
    throw ConfigError("threshold must lie strictly between 0 and 1");
  }
  const Snapshot snapshot = load_snapshot(a.model);
  const Stack stack = load_stack(a.input);
  const Prediction prediction = infer_stack(snapshot.model, stack, options);
  if (a.output.has_parent_path()) ensure_directory(a.output.parent_path());
  save_mask(prediction.binary, stack, a.output);
  if (!a.prob.empty()) {
    if (a.prob.has_parent_path()) ensure_directory(a.prob.parent_path());
    Stack probs;
    probs.voxels = prediction.probabilities;
    probs.spacing = stack.spacing;
    probs.identifier = stack.identifier;
    save_stack(probs, a.prob);
  }
  if (prediction.empty_warning) {
    spdlog::warn("predicted mask for '{}' is empty", a.input.string());
  }
  spdlog::info("wrote mask with {} foreground voxels to {}", prediction.binary.count(),
               a.output.string());
  return kExitOk;
}

void print_summary(const EvalReport& report) {
  std::printf("%-24s %6s %8s %8s %8s %8s %8s %8s %9s\n", "method", "count", "min", "q1", "median",
              "q3", "max", "mean", "outliers");
  for (const auto& m : report.methods) {
    const auto& s = m.summary;
    std::printf("%-24s %6zu %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %9zu\n", m.method.c_str(),
                s.count, s.min, s.q1, s.median, s.q3, s.max, s.mean, s.outliers);
  }
}

int cmd_eval(const GlobalOptions& g, const EvalArgs& a) {
  spdlog::info("eval: pred={} gt={} name={} out={} threshold={} seed={}", a.pred.string(),
               a.gt.string(), a.name, a.out.string(), a.threshold, g.seed);
  std::vector<std::string> warnings;
  const MethodScores scores = evaluate_directory(a.pred, a.gt, a.name, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  const EvalReport report = compare(std::span<const MethodScores>(&scores, 1), a.threshold);
  if (!a.out.empty()) {
    render_report(report, a.out);
    write_scores_csv(scores, a.out / "scores.csv");
    spdlog::info("wrote report to {}", a.out.string());
  }
  print_summary(report);
  return kExitOk;
}

int cmd_compare(const GlobalOptions& g, const CompareArgs& a) {
  spdlog::info("compare: {} score files out={} threshold={} seed={}", a.scores.size(),
               a.out.string(), a.threshold, g.seed);
  if (!a.names.empty() && a.names.size() != a.scores.size()) {
    throw ConfigError("--names must give one name per score file");
  }
  std::vector<MethodScores> methods;
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    methods.push_back(read_scores_csv(a.scores[i], a.names.empty() ? "" : a.names[i]));
  }
  const EvalReport report = compare(methods, a.threshold);
  if (!a.out.empty()) {
    render_report(report, a.out);
    spdlog::info("wrote report to {}", a.out.string());
  }
  print_summary(report);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"fbseg: single-step fetal brain segmentation on 2D slices of MR stacks", "fbseg"};
  app.set_version_flag("--version", std::string("fbseg ") + FBSEG_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->default_val(42);
  app.add_option("--verbosity", g.verbosity, "Log level")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->default_val("info");
  app.add_option("--workers", g.num_workers, "Patch-sampling worker threads (0 = synchronous)")
      ->check(CLI::NonNegativeNumber)
      ->default_val(0);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Print the network plan for a patch size as JSON");
  plan->add_option("--patch-size", plan_args.patch_size, "Patch size HxW")->default_val("448x512");
  plan->add_option("--max-depth", plan_args.max_depth, "Depth cap")->default_val(kDefaultMaxDepth);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic phantom dataset");
  synth->add_option("--count", synth_args.count, "Number of stacks")->default_val(1);
  synth->add_option("--shape", synth_args.shape, "Stack shape HxWxS")->default_val("64x64x10");
  synth->add_option("--noise", synth_args.noise, "Gaussian noise level")->default_val(0.1);
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--validation-count", synth_args.validation_count,
                    "Stacks assigned to validation (default count/5)");
  synth->add_option("--test-count", synth_args.test_count, "Stacks assigned to test")
      ->default_val(0);
  synth->add_option("--centre", synth_args.centre, "Centre tag")->default_val("SYN");

  TrainArgs train_args;
  auto* trn = app.add_subcommand("train", "Train a model and keep the best validation snapshot");
  trn->add_option("--manifest", train_args.manifest, "Manifest CSV")->required();
  trn->add_option("--config", train_args.config, "Training config JSON");
  trn->add_option("--out", train_args.out, "Run directory")->required();

  InferArgs infer_args;
  auto* inf = app.add_subcommand("infer", "Segment a stack with a saved snapshot");
  inf->add_option("--model", infer_args.model, "Snapshot directory")->required();
  inf->add_option("--input", infer_args.input, "Input stack (.nii/.nii.gz)")->required();
  inf->add_option("--output", infer_args.output, "Output mask path")->required();
  inf->add_option("--prob", infer_args.prob, "Optional foreground probability output");
  inf->add_option("--threshold", infer_args.threshold, "Probability threshold")->default_val(0.5);
  inf->add_option("--connectivity", infer_args.connectivity, "Largest-component connectivity")
      ->check(CLI::IsMember({6, 26}))
      ->default_val(26);

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "Score predicted masks against ground truth");
  ev->add_option("--pred", eval_args.pred, "Prediction directory")->required();
  ev->add_option("--gt", eval_args.gt, "Ground-truth directory")->required();
  ev->add_option("--name", eval_args.name, "Method name")->default_val("method");
  ev->add_option("--out", eval_args.out, "Report directory");
  ev->add_option("--threshold", eval_args.threshold, "Outlier threshold")
      ->default_val(kOutlierThreshold);

  CompareArgs compare_args;
  auto* cmp = app.add_subcommand("compare", "Compare score files of several methods");
  cmp->add_option("--scores", compare_args.scores, "Score CSV files (stack_id,dice)")
      ->required()
      ->expected(1, -1);
  cmp->add_option("--names", compare_args.names, "Method names (default: file stems)")
      ->expected(1, -1);
  cmp->add_option("--out", compare_args.out, "Report directory");
  cmp->add_option("--threshold", compare_args.threshold, "Outlier threshold")
      ->default_val(kOutlierThreshold);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }
  g.seed_given = app.get_option("--seed")->count() > 0;

  try {
    configure_logging(g.verbosity);
    if (*plan) return cmd_plan(g, plan_args);
    if (*synth) return cmd_synth(g, synth_args);
    if (*trn) return cmd_train(g, train_args);
    if (*inf) return cmd_infer(g, infer_args);
    if (*ev) return cmd_eval(g, eval_args);
    if (*cmp) return cmd_compare(g, compare_args);
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInvalid;
  }
  std::cerr << app.help();
  return kExitInvalid;
}

}  // namespace fbseg::cli
