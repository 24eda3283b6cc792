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

#include "fbseg/snapshot.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fbseg/errors.hpp"
#include "json.hpp"

namespace fbseg {
namespace {

constexpr char kMagic[8] = {'F', 'B', 'S', 'G', 'P', 'R', 'M', '1'};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw FormatError("'" + path.string() + "' is truncated");
  }
  return v;
}

}  // namespace

void save_parameters(const nn::ParameterSet& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params.entries()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    for (std::size_t d : p.value.shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void load_parameters(nn::ParameterSet& params, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("'" + path.string() + "' is not a parameter file");
  }
  const auto count = get<std::uint32_t>(in, path);
  if (count != params.size()) {
    throw FormatError("'" + path.string() + "' holds " + std::to_string(count) +
                      " tensors, model expects " + std::to_string(params.size()));
  }
  for (auto& p : params.entries()) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError("'" + path.string() + "' is truncated");
    if (name != p.name) {
      throw FormatError("parameter '" + name + "' found where '" + p.name + "' was expected");
    }
    Tensor::Shape shape{};
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in, path));
    if (shape != p.value.shape()) {
      throw FormatError("parameter '" + name + "' has shape " + to_string(shape) +
                        ", model expects " + to_string(p.value.shape()));
    }
    if (!in.read(reinterpret_cast<char*>(p.value.data()),
                 static_cast<std::streamsize>(p.value.size() * sizeof(double)))) {
      throw FormatError("'" + path.string() + "' is truncated");
    }
  }
}

void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "plan.json", plan_to_json(snapshot.model.plan()));
  save_parameters(snapshot.model.parameters(), dir / "params.bin");
  nlohmann::ordered_json meta;
  meta["epoch"] = snapshot.epoch;
  meta["val_dice"] = snapshot.val_dice;
  meta["seed"] = snapshot.seed;
  meta["config_hash"] = snapshot.config_hash;
  meta["parameter_count"] = snapshot.model.parameter_count();
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

Snapshot load_snapshot(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("snapshot directory '" + dir.string() + "' does not exist");
  }
  const NetPlan plan = plan_from_json(read_text(dir / "plan.json"));
  Snapshot snap{SegmentationModel(plan, 0), 0, 0.0, 0, ""};
  load_parameters(snap.model.parameters(), dir / "params.bin");
  try {
    const auto meta = nlohmann::json::parse(read_text(dir / "meta.json"));
    snap.epoch = meta.at("epoch").get<int>();
    snap.val_dice = meta.at("val_dice").get<double>();
    snap.seed = meta.at("seed").get<std::uint64_t>();
    snap.config_hash = meta.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed snapshot metadata in '" + dir.string() + "': " + e.what());
  }
  return snap;
}

}  // namespace fbseg
