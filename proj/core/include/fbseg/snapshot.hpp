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
#include <string>

#include "fbseg/model.hpp"

namespace fbseg {

// A saved weight set tagged with its epoch and validation Dice.
struct Snapshot {
  SegmentationModel model;
  int epoch = 0;
  double val_dice = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Directory layout:
//   plan.json    - the NetPlan
//   params.bin   - named parameter tensors (see save_parameters)
//   meta.json    - epoch, val_dice, seed, config_hash
void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir);

// Throws IoError if a file is missing, FormatError if a file is corrupt or
// the parameters do not match the plan.
Snapshot load_snapshot(const std::filesystem::path& dir);

// params.bin: magic "FBSGPRM1", u32 tensor count, then per tensor: u32 name
// length, name bytes, four u64 extents, raw little-endian doubles. Values
// round-trip bit-exactly.
void save_parameters(const nn::ParameterSet& params, const std::filesystem::path& path);
// Names and shapes must match `params` exactly.
void load_parameters(nn::ParameterSet& params, const std::filesystem::path& path);

}  // namespace fbseg
