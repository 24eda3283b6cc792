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

#include "fbseg/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fbseg/errors.hpp"

namespace fbseg {

SegmentationModel::SegmentationModel(const NetPlan& plan, std::uint64_t seed) : plan_(plan) {
  validate_plan(plan_);
  const double slope = plan_.negative_slope;
  const auto& f = plan_.features;

  for (int level = 0; level <= plan_.depth; ++level) {
    const std::string name = "encoder." + std::to_string(level);
    const int in = level == 0 ? 1 : f[level - 1];
    const int stride = level == 0 ? 1 : plan_.strides[level - 1][0];
    const int kernel = plan_.kernels[level][0];
    encoder_.push_back({nn::ConvBlock(params_, name + ".block0", in, f[level], kernel, stride, slope),
                        nn::ConvBlock(params_, name + ".block1", f[level], f[level], kernel, 1,
                                      slope)});
  }
  for (int level = 0; level < plan_.depth; ++level) {
    const std::string name = "decoder." + std::to_string(level);
    const int kernel = plan_.kernels[level][0];
    decoder_.push_back(DecoderLevel{
        nn::ConvTranspose2x2(params_, name + ".up", f[level + 1], f[level]),
        nn::ConvBlock(params_, name + ".block0", 2 * f[level], f[level], kernel, 1, slope),
        nn::ConvBlock(params_, name + ".block1", f[level], f[level], kernel, 1, slope)});
  }
  output_ = nn::Conv2d(params_, "output", f[0], kNumClasses, 1, 1, true);
  for (int head = 1; head <= plan_.deep_supervision_heads; ++head) {
    heads_.emplace_back(params_, "head." + std::to_string(head), f[head], kNumClasses, 1, 1,
                        true);
  }

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  for (const auto& level : encoder_) {
    for (const auto& block : level) block.initialize(params_, rng);
  }
  const double gain = std::sqrt(2.0 / (1.0 + slope * slope));
  for (const auto& level : decoder_) {
    level.up.initialize(params_, rng, gain);
    level.first.initialize(params_, rng);
    level.second.initialize(params_, rng);
  }
  output_.initialize(params_, rng, 1.0);
  for (const auto& head : heads_) head.initialize(params_, rng, 1.0);
}

SegmentationModel build_model(const NetPlan& plan, std::uint64_t seed) {
  return SegmentationModel(plan, seed);
}

Extent2 SegmentationModel::size_multiple() const { return plan_.total_stride(); }

Extent2 SegmentationModel::min_extent() const {
  const Extent2 stride = plan_.total_stride();
  return {stride[0] * kMinBottleneckExtent, stride[1] * kMinBottleneckExtent};
}

void SegmentationModel::check_input(const Tensor& batch) const {
  if (batch.n() < 1 || batch.c() != 1) {
    throw ValidationError("model input must be (B,1,H,W) with B >= 1, got " +
                          to_string(batch.shape()));
  }
  const Extent2 multiple = size_multiple();
  const Extent2 minimum = min_extent();
  const std::size_t extent[2] = {batch.h(), batch.w()};
  for (int a = 0; a < 2; ++a) {
    if (extent[a] % static_cast<std::size_t>(multiple[a]) != 0 ||
        extent[a] < static_cast<std::size_t>(minimum[a])) {
      throw ValidationError("model input " + to_string(batch.shape()) +
                            " is incompatible with the plan (axes must be multiples of " +
                            std::to_string(multiple[a]) + " and >= " +
                            std::to_string(minimum[a]) + ")");
    }
  }
  if (!batch.all_finite()) throw ValidationError("model input contains non-finite values");
}

std::vector<Tensor> SegmentationModel::forward(const Tensor& batch, Mode mode) const {
  return run(batch, mode, nullptr);
}

std::vector<Tensor> SegmentationModel::forward(const Tensor& batch, Tape& tape) const {
  return run(batch, Mode::kTraining, &tape);
}

Tensor SegmentationModel::logits(const Tensor& batch) const {
  return std::move(run(batch, Mode::kInference, nullptr).front());
}

std::vector<Tensor> SegmentationModel::run(const Tensor& batch, Mode mode, Tape* tape) const {
  check_input(batch);
  const int depth = plan_.depth;
  if (tape) {
    tape->input = batch;
    tape->encoder.assign(depth + 1, std::vector<nn::ConvBlock::Cache>(2));
    tape->decoder.assign(depth, std::vector<nn::ConvBlock::Cache>(2));
    tape->decoder_inputs.assign(depth, Tensor());
    tape->decoder_outputs.assign(depth, Tensor());
  }
  auto encoder_cache = [tape](int level, int block) -> nn::ConvBlock::Cache* {
    return tape ? &tape->encoder[level][block] : nullptr;
  };
  auto decoder_cache = [tape](int level, int block) -> nn::ConvBlock::Cache* {
    return tape ? &tape->decoder[level][block] : nullptr;
  };

  std::vector<Tensor> skips(depth + 1);
  Tensor x = batch;
  for (int level = 0; level <= depth; ++level) {
    x = encoder_[level][0].forward(params_, x, encoder_cache(level, 0));
    x = encoder_[level][1].forward(params_, x, encoder_cache(level, 1));
    if (level < depth) skips[level] = x;
  }

  std::vector<Tensor> decoder_out(depth);
  for (int level = depth - 1; level >= 0; --level) {
    const DecoderLevel& dec = decoder_[level];
    if (tape) tape->decoder_inputs[level] = x;
    Tensor merged = concat_channels(dec.up.forward(params_, x), skips[level]);
    x = dec.first.forward(params_, merged, decoder_cache(level, 0));
    x = dec.second.forward(params_, x, decoder_cache(level, 1));
    decoder_out[level] = x;
  }
  if (tape) tape->decoder_outputs = decoder_out;

  std::vector<Tensor> outputs;
  outputs.push_back(output_.forward(params_, decoder_out[0]));
  if (mode == Mode::kTraining) {
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      outputs.push_back(heads_[h].forward(params_, decoder_out[h + 1]));
    }
  }
  return outputs;
}

void SegmentationModel::backward(const Tape& tape, const std::vector<Tensor>& output_grads,
                                 nn::Gradients& grads) const {
  const int depth = plan_.depth;
  if (output_grads.size() != 1 + heads_.size()) {
    throw ValidationError("backward expects one gradient per training output");
  }
  if (grads.size() != params_.size()) {
    throw ValidationError("gradient buffer does not match the parameter set");
  }

  // Gradient arriving at each decoder level's output.
  std::vector<Tensor> grad_dec(depth);
  grad_dec[0] = output_.backward(params_, tape.decoder_outputs[0], output_grads[0], grads);
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    Tensor g = heads_[h].backward(params_, tape.decoder_outputs[h + 1], output_grads[h + 1], grads);
    grad_dec[h + 1] = std::move(g);
  }

  std::vector<Tensor> grad_skip(depth);
  Tensor grad_bottleneck;
  for (int level = 0; level < depth; ++level) {
    const DecoderLevel& dec = decoder_[level];
    Tensor g = dec.second.backward(params_, tape.decoder[level][1], grad_dec[level], grads);
    g = dec.first.backward(params_, tape.decoder[level][0], g, grads);

    // Split the concatenation gradient: upsampled channels first, then skip.
    const std::size_t up_channels = static_cast<std::size_t>(plan_.features[level]);
    Tensor g_up(g.n(), up_channels, g.h(), g.w());
    Tensor g_skip(g.n(), g.c() - up_channels, g.h(), g.w());
    const std::size_t plane = g.plane_size();
    for (std::size_t n = 0; n < g.n(); ++n) {
      std::copy_n(g.plane(n, 0), up_channels * plane, g_up.plane(n, 0));
      std::copy_n(g.plane(n, up_channels), g_skip.c() * plane, g_skip.plane(n, 0));
    }
    grad_skip[level] = std::move(g_skip);

    Tensor g_in = dec.up.backward(params_, tape.decoder_inputs[level], g_up, grads);
    if (level + 1 < depth) {
      Tensor& target = grad_dec[level + 1];
      if (target.size() == 0) {
        target = std::move(g_in);
      } else {
        for (std::size_t i = 0; i < target.size(); ++i) target.data()[i] += g_in.data()[i];
      }
    } else {
      grad_bottleneck = std::move(g_in);
    }
  }

  Tensor g = std::move(grad_bottleneck);
  for (int level = depth; level >= 0; --level) {
    if (level < depth) {
      for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += grad_skip[level].data()[i];
    }
    g = encoder_[level][1].backward(params_, tape.encoder[level][1], g, grads);
    g = encoder_[level][0].backward(params_, tape.encoder[level][0], g, grads, level > 0);
  }
}

}  // namespace fbseg
