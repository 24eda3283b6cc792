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

#include "fbseg/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fbseg/errors.hpp"

namespace fbseg {
namespace {

constexpr std::string_view kHeader = "image_path,mask_path,split,centre";

// RFC 4180 field splitting: quoted fields may contain commas and doubled
// quotes.
std::vector<std::string> split_csv_row(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "validation") return Split::kValidation;
  if (text == "test") return Split::kTest;
  return std::nullopt;
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = strip_cr(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (line.empty()) continue;

    if (!seen_header) {
      if (line != kHeader) {
        throw ParseError("expected header '" + std::string(kHeader) + "'", line_no);
      }
      seen_header = true;
      continue;
    }

    const auto fields = split_csv_row(line, line_no);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, found " + std::to_string(fields.size()), line_no);
    }
    ManifestEntry entry;
    if (fields[0].empty()) throw ParseError("empty image_path", line_no);
    entry.image_path = fields[0];
    if (!fields[1].empty()) entry.mask_path = std::filesystem::path(fields[1]);
    const auto split = parse_split(fields[2]);
    if (!split) {
      throw ParseError("unknown split '" + fields[2] +
                           "' (expected train, validation or test)",
                       line_no);
    }
    entry.split = *split;
    entry.centre = fields[3];
    if (entry.split != Split::kTest && !entry.mask_path) {
      throw ValidationError("line " + std::to_string(line_no) + ": " +
                            std::string(to_string(entry.split)) +
                            " entry has no mask_path");
    }
    entries.push_back(std::move(entry));
  }
  if (!seen_header) throw ParseError("manifest is empty", 1);
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto entries = parse_manifest(buf.str());

  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
  };
  for (auto& e : entries) {
    e.image_path = resolve(e.image_path);
    if (!std::filesystem::exists(e.image_path)) {
      throw IoError("manifest '" + path.string() + "' references missing image '" +
                    e.image_path.string() + "'");
    }
    if (e.mask_path) {
      e.mask_path = resolve(*e.mask_path);
      if (!std::filesystem::exists(*e.mask_path)) {
        throw IoError("manifest '" + path.string() + "' references missing mask '" +
                      e.mask_path->string() + "'");
      }
    }
  }
  return entries;
}

std::string serialize_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const auto& e : entries) {
    out += quote_if_needed(e.image_path.string());
    out.push_back(',');
    if (e.mask_path) out += quote_if_needed(e.mask_path->string());
    out.push_back(',');
    out += to_string(e.split);
    out.push_back(',');
    out += quote_if_needed(e.centre);
    out.push_back('\n');
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << serialize_manifest(entries);
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

SplitCounts count_splits(const std::vector<ManifestEntry>& entries) {
  SplitCounts counts;
  for (const auto& e : entries) {
    switch (e.split) {
      case Split::kTrain: ++counts.train; break;
      case Split::kValidation: ++counts.validation; break;
      case Split::kTest: ++counts.test; break;
    }
  }
  return counts;
}

std::map<std::string, SplitCounts> count_splits_by_centre(
    const std::vector<ManifestEntry>& entries) {
  std::map<std::string, std::vector<ManifestEntry>> grouped;
  for (const auto& e : entries) grouped[e.centre].push_back(e);
  std::map<std::string, SplitCounts> out;
  for (const auto& [centre, group] : grouped) out[centre] = count_splits(group);
  return out;
}

std::vector<ManifestEntry> select_split(const std::vector<ManifestEntry>& entries, Split split) {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

}  // namespace fbseg
