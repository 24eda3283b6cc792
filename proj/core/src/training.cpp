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

#include "fbseg/training.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fbseg/errors.hpp"
#include "fbseg/metrics.hpp"
#include "fbseg/nifti.hpp"
#include "fbseg/optimizer.hpp"
#include "fbseg/patch.hpp"
#include "json.hpp"

namespace fbseg {
namespace {

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ConfigError("invalid training config: " + field + " " + rule);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Produces batches 0..total-1 on `workers` threads and hands them out in
// index order. Batch k only depends on k, so the sequence is independent of
// the worker count.
class BatchPipeline {
 public:
  using Producer = std::function<Batch(std::uint64_t)>;

  BatchPipeline(Producer producer, std::uint64_t total, int workers)
      : producer_(std::move(producer)), total_(total) {
    if (workers <= 0) return;
    window_ = static_cast<std::uint64_t>(2 * workers);
    for (int lane = 0; lane < workers; ++lane) {
      threads_.emplace_back([this, lane, workers] { run_lane(lane, workers); });
    }
  }

  ~BatchPipeline() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  BatchPipeline(const BatchPipeline&) = delete;
  BatchPipeline& operator=(const BatchPipeline&) = delete;

  Batch next() {
    const std::uint64_t index = next_++;
    if (threads_.empty()) return producer_(index);
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return ready_.count(index) > 0 || error_; });
    if (error_) std::rethrow_exception(error_);
    Batch batch = std::move(ready_.at(index));
    ready_.erase(index);
    consumed_ = index + 1;
    lock.unlock();
    cv_.notify_all();
    return batch;
  }

 private:
  void run_lane(int lane, int workers) {
    for (std::uint64_t k = static_cast<std::uint64_t>(lane); k < total_;
         k += static_cast<std::uint64_t>(workers)) {
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || k < consumed_ + window_; });
        if (stop_) return;
      }
      try {
        Batch batch = producer_(k);
        std::lock_guard lock(mutex_);
        ready_.emplace(k, std::move(batch));
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
      }
      cv_.notify_all();
    }
  }

  Producer producer_;
  std::uint64_t total_;
  std::uint64_t window_ = 0;
  std::uint64_t next_ = 0;
  std::uint64_t consumed_ = 0;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::uint64_t, Batch> ready_;
  std::exception_ptr error_;
  bool stop_ = false;
};

Snapshot make_snapshot(const SegmentationModel& model, int epoch, double dice,
                       const TrainConfig& config, const std::string& hash) {
  return Snapshot{model, epoch, dice, config.seed, hash};
}

}  // namespace

void validate_config(const TrainConfig& c) {
  require(c.patch_size[0] >= 8 && c.patch_size[1] >= 8 && c.patch_size[0] % 2 == 0 &&
              c.patch_size[1] % 2 == 0,
          "patch_size", "axes must be even and >= 8");
  require(c.batch_size >= 1, "batch_size", "must be >= 1");
  require(c.max_epochs >= 1, "max_epochs", "must be >= 1");
  require(c.iterations_per_epoch >= 1, "iterations_per_epoch", "must be >= 1");
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "learning_rate",
          "must be positive");
  require(c.momentum >= 0.0 && c.momentum < 1.0, "momentum", "must be in [0, 1)");
  require(c.lr_decay_exponent > 0.0, "lr_decay_exponent", "must be positive");
  require(c.loss_weights.dice >= 0.0 && c.loss_weights.cross_entropy >= 0.0 &&
              c.loss_weights.dice + c.loss_weights.cross_entropy > 0.0,
          "loss_weights", "must be nonnegative with a positive sum");
  require(c.validation_every >= 1 && c.validation_every <= c.max_epochs, "validation_every",
          "must be in [1, max_epochs]");
  require(c.max_depth >= 1, "max_depth", "must be >= 1");
  require(c.threshold > 0.0 && c.threshold < 1.0, "threshold", "must be in (0, 1)");
  require(c.connectivity == 6 || c.connectivity == 26, "connectivity", "must be 6 or 26");
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["patch_size"] = c.patch_size;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["iterations_per_epoch"] = c.iterations_per_epoch;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["lr_decay_exponent"] = c.lr_decay_exponent;
  j["loss_weights"] = {c.loss_weights.dice, c.loss_weights.cross_entropy};
  j["validation_every"] = c.validation_every;
  j["augment"] = c.augment;
  j["seed"] = c.seed;
  j["deep_supervision"] = c.deep_supervision;
  j["max_depth"] = c.max_depth;
  j["max_grad_norm"] = c.max_grad_norm;
  j["threshold"] = c.threshold;
  j["connectivity"] = c.connectivity;
  return j.dump(2) + "\n";
}

TrainConfig config_from_json(const std::string& text) {
  static const std::set<std::string> known = {
      "patch_size", "batch_size", "max_epochs", "iterations_per_epoch", "learning_rate",
      "momentum", "lr_decay_exponent", "loss_weights", "validation_every", "augment", "seed",
      "deep_supervision", "max_depth", "max_grad_norm", "threshold", "connectivity"};
  TrainConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw ConfigError("training config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown training config field '" + key + "'");
    }
    if (j.contains("patch_size")) c.patch_size = j["patch_size"].get<Extent2>();
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.iterations_per_epoch = j.value("iterations_per_epoch", c.iterations_per_epoch);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.lr_decay_exponent = j.value("lr_decay_exponent", c.lr_decay_exponent);
    if (j.contains("loss_weights")) {
      const auto w = j["loss_weights"].get<std::array<double, 2>>();
      c.loss_weights = {w[0], w[1]};
    }
    c.validation_every = j.value("validation_every", c.validation_every);
    c.augment = j.value("augment", c.augment);
    c.seed = j.value("seed", c.seed);
    c.deep_supervision = j.value("deep_supervision", c.deep_supervision);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
    c.threshold = j.value("threshold", c.threshold);
    c.connectivity = j.value("connectivity", c.connectivity);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed training config: ") + e.what());
  }
  validate_config(c);
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::string config_hash(const TrainConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string history_to_csv(std::span<const HistoryRecord> history) {
  std::string out = "epoch,iteration,loss,lr,val_dice\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + std::to_string(r.iteration) + ",";
    if (r.loss) out += format_double(*r.loss);
    out += "," + format_double(r.lr) + ",";
    if (r.val_dice) out += format_double(*r.val_dice);
    out += "\n";
  }
  return out;
}

void write_history_csv(std::span<const HistoryRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << history_to_csv(history);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ValidationResult validate_3d(const SliceSegmenter& segmenter,
                             std::span<const LabeledStack> validation,
                             const InferenceOptions& options) {
  if (validation.empty()) throw ConfigError("validation set is empty");
  ValidationResult result;
  double total = 0.0;
  for (const auto& item : validation) {
    const Prediction pred = infer_stack(segmenter, item.stack, options);
    const double dice = dice_3d(pred.binary, item.mask).value;
    result.per_stack.push_back(dice);
    total += dice;
  }
  result.mean_dice = total / static_cast<double>(validation.size());
  return result;
}

Batch make_batch(std::span<const LabeledStack> train_set, const TrainConfig& config,
                 std::uint64_t batch_index) {
  if (train_set.empty()) throw ConfigError("training set is empty");
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(batch_index),
                    static_cast<std::uint32_t>(batch_index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, train_set.size() - 1);

  const auto b = static_cast<std::size_t>(config.batch_size);
  const auto ph = static_cast<std::size_t>(config.patch_size[0]);
  const auto pw = static_cast<std::size_t>(config.patch_size[1]);
  Batch batch{Tensor(b, 1, ph, pw), LabelMap(b, ph, pw)};
  for (std::size_t i = 0; i < b; ++i) {
    const LabeledStack& item = train_set[pick(rng)];
    Patch patch = sample_patch(item.stack, item.mask, config.patch_size, rng);
    if (config.augment) augment(patch, rng);
    std::copy(patch.image.values.begin(), patch.image.values.end(), batch.images.plane(i, 0));
    std::copy(patch.label.values.begin(), patch.label.values.end(),
              batch.labels.labels.begin() + static_cast<std::ptrdiff_t>(i * ph * pw));
  }
  return batch;
}

TrainResult train(std::span<const LabeledStack> train_set, std::span<const LabeledStack> val_set,
                  const NetPlan& plan, const TrainConfig& config, const TrainOptions& options) {
  validate_config(config);
  if (train_set.empty()) throw ConfigError("training needs at least one train stack");
  if (!options.validator && val_set.empty()) {
    throw ConfigError("training needs at least one validation stack");
  }
  if (plan.patch_size != config.patch_size) {
    throw ConfigError("plan patch size does not match the training config");
  }
  NetPlan effective = plan;
  if (!config.deep_supervision) effective.deep_supervision_heads = 0;

  SegmentationModel model(effective, config.seed);
  const std::string hash = config_hash(config);
  NesterovSgd optimizer(model.parameters(), config.momentum, config.max_grad_norm);
  nn::Gradients grads = model.parameters().zeros_like();
  const std::vector<double> head_weights =
      deep_supervision_weights(1 + static_cast<std::size_t>(effective.deep_supervision_heads));

  InferenceOptions inference;
  inference.threshold = config.threshold;
  inference.connectivity = connectivity_from_int(config.connectivity);
  Validator validator = options.validator;
  if (!validator) {
    validator = [&](const SegmentationModel& m, int) {
      return validate_3d(m, val_set, inference).mean_dice;
    };
  }

  const std::uint64_t total_batches =
      static_cast<std::uint64_t>(config.max_epochs) * config.iterations_per_epoch;
  BatchPipeline pipeline(
      [&](std::uint64_t k) { return make_batch(train_set, config, k); }, total_batches,
      options.num_workers);

  TrainResult result{make_snapshot(model, 0, 0.0, config, hash),
                     make_snapshot(model, 0, 0.0, config, hash),
                     {}};
  auto emit = [&](HistoryRecord r) {
    if (options.on_record) options.on_record(r);
    result.history.push_back(std::move(r));
  };

  std::optional<double> best_dice;
  std::optional<double> last_dice;
  int iteration = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = poly_learning_rate(config.learning_rate, epoch - 1, config.max_epochs,
                                         config.lr_decay_exponent);
    for (int it = 0; it < config.iterations_per_epoch; ++it) {
      ++iteration;
      const Batch batch = pipeline.next();
      zero_gradients(grads);
      Tape tape;
      const std::vector<Tensor> outputs = model.forward(batch.images, tape);
      const LossResult loss = combined_loss(outputs, batch.labels, config.loss_weights, head_weights);
      if (!std::isfinite(loss.value)) {
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch) + ", iteration " + std::to_string(iteration));
      }
      model.backward(tape, loss.grads, grads);
      optimizer.step(model.parameters(), grads, lr);
      emit(HistoryRecord{epoch, iteration, loss.value, lr, std::nullopt});
    }

    if (epoch % config.validation_every == 0) {
      const double dice = validator(model, epoch);
      if (!(dice >= 0.0 && dice <= 1.0)) {
        throw ValidationError("validator returned " + std::to_string(dice) +
                              " outside [0, 1] at epoch " + std::to_string(epoch));
      }
      emit(HistoryRecord{epoch, iteration, std::nullopt, lr, dice});
      last_dice = dice;
      if (!best_dice || dice >= *best_dice) {
        best_dice = dice;
        result.best = make_snapshot(model, epoch, dice, config, hash);
      }
    }
  }
  result.last = make_snapshot(model, config.max_epochs, last_dice.value_or(0.0), config, hash);
  return result;
}

std::vector<LabeledStack> load_labeled(const std::vector<ManifestEntry>& entries) {
  std::vector<LabeledStack> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.mask_path) {
      throw ValidationError("entry '" + e.image_path.string() + "' has no mask");
    }
    LabeledStack item{load_stack(e.image_path), load_mask(*e.mask_path)};
    item.stack.centre = e.centre;
    validate_mask(item.mask, item.stack);
    out.push_back(std::move(item));
  }
  return out;
}

TrainResult train(const std::vector<ManifestEntry>& manifest, const NetPlan& plan,
                  const TrainConfig& config, const TrainOptions& options) {
  const auto train_set = load_labeled(select_split(manifest, Split::kTrain));
  const auto val_set = load_labeled(select_split(manifest, Split::kValidation));
  if (train_set.empty() || val_set.empty()) {
    throw ConfigError("manifest needs at least one train and one validation entry");
  }
  return train(train_set, val_set, plan, config, options);
}

}  // namespace fbseg
