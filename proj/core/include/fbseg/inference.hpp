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

#include "fbseg/connected_components.hpp"
#include "fbseg/model.hpp"
#include "fbseg/volume.hpp"

namespace fbseg {

struct InferenceOptions {
  double threshold = 0.5;
  Connectivity connectivity = Connectivity::kFull;
  // Slices per forward pass.
  std::size_t batch_slices = 4;
};

struct Prediction {
  Volume<float> probabilities;  // foreground softmax, stack shape
  Mask binary;
  double threshold = 0.5;
  // Set when nothing survived thresholding.
  bool empty_warning = false;
};

// voxel = 1 iff probability >= threshold. Throws ConfigError unless
// 0 < threshold < 1.
Mask binarize(const Volume<float>& probabilities, double threshold,
              const Spacing& spacing = {1.0, 1.0, 1.0});

// Smallest extent >= the slice extent that is a multiple of the segmenter's
// size multiple and at least its minimum extent.
Extent2 padded_extent(std::size_t rows, std::size_t cols, const SliceSegmenter& segmenter);

// Segments every slice (normalize, centre zero-pad, logits, softmax, crop
// back), stacks the foreground probabilities, then thresholds and keeps the
// largest connected component. Throws NumericError if the segmenter returns
// non-finite logits.
Prediction infer_stack(const SliceSegmenter& segmenter, const Stack& stack,
                       const InferenceOptions& options = {});

}  // namespace fbseg
