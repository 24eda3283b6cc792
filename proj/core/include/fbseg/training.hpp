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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbseg/inference.hpp"
#include "fbseg/loss.hpp"
#include "fbseg/manifest.hpp"
#include "fbseg/planner.hpp"
#include "fbseg/snapshot.hpp"

namespace fbseg {

struct TrainConfig {
  Extent2 patch_size{448, 512};
  int batch_size = 2;
  int max_epochs = 1000;
  int iterations_per_epoch = 250;
  double learning_rate = 0.01;
  double momentum = 0.99;
  double lr_decay_exponent = 0.9;
  LossWeights loss_weights{1.0, 1.0};
  int validation_every = 1;
  bool augment = true;
  std::uint64_t seed = 42;
  bool deep_supervision = true;
  // Planner depth cap.
  int max_depth = kDefaultMaxDepth;
  // Global gradient-norm clip; <= 0 disables.
  double max_grad_norm = 12.0;
  // Post-processing used during validation.
  double threshold = 0.5;
  int connectivity = 26;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws ConfigError naming the offending field.
void validate_config(const TrainConfig& config);

// JSON with TrainConfig field names; patch_size is [H, W] and loss_weights
// is [w_dice, w_ce]. Missing fields take defaults, unknown fields are
// rejected.
std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);
TrainConfig load_config(const std::filesystem::path& path);

// 16 hex digits of FNV-1a over the canonical config JSON.
std::string config_hash(const TrainConfig& config);

struct HistoryRecord {
  int epoch = 0;
  int iteration = 0;  // global, 1-based
  std::optional<double> loss;
  double lr = 0.0;
  std::optional<double> val_dice;

  friend bool operator==(const HistoryRecord&, const HistoryRecord&) = default;
};

// epoch,iteration,loss,lr,val_dice with %.17g numbers; missing values blank.
std::string history_to_csv(std::span<const HistoryRecord> history);
void write_history_csv(std::span<const HistoryRecord> history, const std::filesystem::path& path);

struct ValidationResult {
  double mean_dice = 0.0;
  std::vector<double> per_stack;
};

// Segments each stack with infer_stack (post-processing included) and
// averages the per-stack 3D Dice. Throws ConfigError for an empty set.
ValidationResult validate_3d(const SliceSegmenter& segmenter,
                             std::span<const LabeledStack> validation,
                             const InferenceOptions& options = {});

// Returns the mean validation Dice of `model` after `epoch`.
using Validator = std::function<double(const SegmentationModel& model, int epoch)>;

struct TrainOptions {
  // Patch-sampling worker threads; 0 samples synchronously. Results do not
  // depend on this value.
  int num_workers = 0;
  // Replaces validate_3d on the validation set when set.
  Validator validator;
  // Called for every history record as it is produced.
  std::function<void(const HistoryRecord&)> on_record;
};

struct TrainResult {
  Snapshot best;
  Snapshot last;
  std::vector<HistoryRecord> history;
};

// One training batch: images (B,1,P_h,P_w) and labels (B,P_h,P_w). Content is
// a pure function of (train set, config, batch index).
struct Batch {
  Tensor images;
  LabelMap labels;
};
Batch make_batch(std::span<const LabeledStack> train_set, const TrainConfig& config,
                 std::uint64_t batch_index);

// Runs max_epochs epochs of iterations_per_epoch SGD steps with the poly
// learning-rate schedule, validating every validation_every epochs. The best
// snapshot maximizes validation Dice, ties going to the later epoch. Throws
// NumericError naming the epoch and iteration if the loss becomes non-finite.
TrainResult train(std::span<const LabeledStack> train_set, std::span<const LabeledStack> val_set,
                  const NetPlan& plan, const TrainConfig& config, const TrainOptions& options = {});

// Loads the train and validation entries of a manifest and trains on them.
TrainResult train(const std::vector<ManifestEntry>& manifest, const NetPlan& plan,
                  const TrainConfig& config, const TrainOptions& options = {});

// Loads image + mask for each entry, checking that shapes agree.
std::vector<LabeledStack> load_labeled(const std::vector<ManifestEntry>& entries);

}  // namespace fbseg
