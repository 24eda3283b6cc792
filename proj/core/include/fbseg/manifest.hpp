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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbseg {

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);
// Accepts exactly "train", "validation" or "test".
std::optional<Split> parse_split(std::string_view text);

struct ManifestEntry {
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> mask_path;
  Split split = Split::kTrain;
  std::string centre;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

// Parses manifest CSV text with header `image_path,mask_path,split,centre`.
// Paths are kept exactly as written. Throws ParseError (with line number) for
// malformed rows or unknown split literals, ValidationError when a train or
// validation row has no mask.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

// Reads a manifest from disk. Relative paths are resolved against the
// manifest's directory and every image (and mask) must exist.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

std::string serialize_manifest(const std::vector<ManifestEntry>& entries);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

SplitCounts count_splits(const std::vector<ManifestEntry>& entries);
std::map<std::string, SplitCounts> count_splits_by_centre(const std::vector<ManifestEntry>& entries);

std::vector<ManifestEntry> select_split(const std::vector<ManifestEntry>& entries, Split split);

}  // namespace fbseg
