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
#include <vector>

#include "fbseg/layers.hpp"
#include "fbseg/planner.hpp"
#include "fbseg/tensor.hpp"

namespace fbseg {

inline constexpr int kNumClasses = 2;

// Anything that maps a batch of padded slices (B,1,H,W) to class logits
// (B,2,H,W). Inference and validation are written against this interface so
// they can be driven by the trained network or by a test oracle.
class SliceSegmenter {
 public:
  virtual ~SliceSegmenter() = default;
  // Padded slice extents must be multiples of this.
  virtual Extent2 size_multiple() const = 0;
  // Padded slice extents must be at least this.
  virtual Extent2 min_extent() const = 0;
  virtual Tensor logits(const Tensor& batch) const = 0;
};

enum class Mode { kInference, kTraining };

// Activations recorded by a training forward pass, consumed by backward().
struct Tape {
  Tensor input;
  std::vector<std::vector<nn::ConvBlock::Cache>> encoder;  // [level][block]
  std::vector<Tensor> decoder_inputs;                      // upsampler input per level
  std::vector<std::vector<nn::ConvBlock::Cache>> decoder;  // [level][block]
  std::vector<Tensor> decoder_outputs;
};

// 2D encoder-decoder network built from a NetPlan: per level two
// conv-norm-activation blocks, strided convolutions for downsampling,
// transposed convolutions for upsampling, channel concatenation skips, a 1x1
// output head and optional 1x1 deep-supervision heads on the decoder levels
// just below full resolution.
class SegmentationModel : public SliceSegmenter {
 public:
  // Parameters are initialized as a pure function of (plan, seed).
  // Throws ConfigError if validate_plan(plan) fails.
  SegmentationModel(const NetPlan& plan, std::uint64_t seed);

  const NetPlan& plan() const noexcept { return plan_; }
  nn::ParameterSet& parameters() noexcept { return params_; }
  const nn::ParameterSet& parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.scalar_count(); }

  // Returns the full-resolution logits first, then (training mode only) one
  // logit map per deep-supervision head, high to low resolution. Throws
  // ValidationError for a wrong channel count, spatial extents the network
  // cannot downsample, or non-finite input.
  std::vector<Tensor> forward(const Tensor& batch, Mode mode) const;
  // Training-mode forward that records activations for backward().
  std::vector<Tensor> forward(const Tensor& batch, Tape& tape) const;

  // Accumulates dL/dparams into grads given dL/d(output_i) for every output
  // returned by the taped forward.
  void backward(const Tape& tape, const std::vector<Tensor>& output_grads,
                nn::Gradients& grads) const;

  Extent2 size_multiple() const override;
  Extent2 min_extent() const override;
  Tensor logits(const Tensor& batch) const override;

  void check_input(const Tensor& batch) const;

 private:
  struct DecoderLevel {
    nn::ConvTranspose2x2 up;
    nn::ConvBlock first;
    nn::ConvBlock second;
  };

  std::vector<Tensor> run(const Tensor& batch, Mode mode, Tape* tape) const;

  NetPlan plan_;
  nn::ParameterSet params_;
  std::vector<std::array<nn::ConvBlock, 2>> encoder_;
  std::vector<DecoderLevel> decoder_;
  nn::Conv2d output_;
  std::vector<nn::Conv2d> heads_;
};

SegmentationModel build_model(const NetPlan& plan, std::uint64_t seed);

}  // namespace fbseg
