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

#include "fbseg/inference.hpp"

#include <algorithm>
#include <cmath>

#include "fbseg/loss.hpp"
#include "fbseg/patch.hpp"

namespace fbseg {
namespace {

std::size_t round_up(std::size_t value, std::size_t multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

}  // namespace

Mask binarize(const Volume<float>& probabilities, double threshold, const Spacing& spacing) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  Mask mask{Volume<std::uint8_t>(probabilities.shape(), 0), spacing};
  const float* p = probabilities.data();
  std::uint8_t* m = mask.voxels.data();
  for (std::size_t i = 0; i < probabilities.size(); ++i) m[i] = p[i] >= threshold ? 1 : 0;
  return mask;
}

Extent2 padded_extent(std::size_t rows, std::size_t cols, const SliceSegmenter& segmenter) {
  const Extent2 multiple = segmenter.size_multiple();
  const Extent2 minimum = segmenter.min_extent();
  auto axis = [](std::size_t size, int mult, int min) {
    const std::size_t m = static_cast<std::size_t>(std::max(mult, 1));
    return static_cast<int>(round_up(std::max(size, static_cast<std::size_t>(min)), m));
  };
  return {axis(rows, multiple[0], minimum[0]), axis(cols, multiple[1], minimum[1])};
}

Prediction infer_stack(const SliceSegmenter& segmenter, const Stack& stack,
                       const InferenceOptions& options) {
  validate_stack(stack);
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0, 1), got " + std::to_string(options.threshold));
  }
  const Shape3& shape = stack.shape();
  const Extent2 padded = padded_extent(shape.h, shape.w, segmenter);
  const auto rw = center_window(shape.h, static_cast<std::size_t>(padded[0]));
  const auto cw = center_window(shape.w, static_cast<std::size_t>(padded[1]));
  const std::size_t chunk = std::max<std::size_t>(options.batch_slices, 1);

  Prediction pred;
  pred.threshold = options.threshold;
  pred.probabilities = Volume<float>(shape, 0.0f);

  for (std::size_t first = 0; first < shape.s; first += chunk) {
    const std::size_t count = std::min(chunk, shape.s - first);
    Tensor batch(count, 1, static_cast<std::size_t>(padded[0]), static_cast<std::size_t>(padded[1]));
    for (std::size_t b = 0; b < count; ++b) {
      const Image2D slice = center_fit(normalize(extract_slice(stack, first + b)), padded, 0.0);
      std::copy(slice.values.begin(), slice.values.end(), batch.plane(b, 0));
    }
    const Tensor logits = segmenter.logits(batch);
    if (logits.n() != count || logits.c() != 2 || logits.h() != batch.h() ||
        logits.w() != batch.w()) {
      throw ValidationError("segmenter returned logits of shape " + to_string(logits.shape()) +
                            " for input " + to_string(batch.shape()));
    }
    if (!logits.all_finite()) {
      throw NumericError("segmenter produced non-finite logits for stack '" + stack.identifier +
                         "'");
    }
    const Tensor probs = softmax(logits);
    for (std::size_t b = 0; b < count; ++b) {
      for (std::size_t r = 0; r < rw.length; ++r) {
        for (std::size_t c = 0; c < cw.length; ++c) {
          pred.probabilities(rw.src_offset + r, cw.src_offset + c, first + b) = static_cast<float>(
              probs(b, 1, rw.dst_offset + r, cw.dst_offset + c));
        }
      }
    }
  }

  const Mask thresholded = binarize(pred.probabilities, options.threshold, stack.spacing);
  pred.binary = keep_largest_cc(thresholded, options.connectivity);
  pred.empty_warning = pred.binary.count() == 0;
  return pred;
}

}  // namespace fbseg
