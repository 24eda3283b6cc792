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

#include "fbseg/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <vector>

namespace fbseg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "NIfTI writer assumes a little-endian host");

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348);

enum DataType : std::int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
  kInt8 = 256,
  kUint16 = 512,
  kUint32 = 768,
  kInt64 = 1024,
  kUint64 = 1280,
};

constexpr char kUnitsMm = 2;

template <typename T>
T byteswap_value(T v) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

void swap_header(Nifti1Header& h) {
  h.sizeof_hdr = byteswap_value(h.sizeof_hdr);
  for (auto& d : h.dim) d = byteswap_value(d);
  h.datatype = byteswap_value(h.datatype);
  h.bitpix = byteswap_value(h.bitpix);
  for (auto& p : h.pixdim) p = byteswap_value(p);
  h.vox_offset = byteswap_value(h.vox_offset);
  h.scl_slope = byteswap_value(h.scl_slope);
  h.scl_inter = byteswap_value(h.scl_inter);
}

struct GzCloser {
  void operator()(gzFile_s* f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

GzHandle open_for_read(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot open '" + path.string() + "': no such file");
  }
  GzHandle f(gzopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  return f;
}

void read_exact(gzFile_s* f, void* dst, std::size_t bytes, const std::filesystem::path& path) {
  auto* out = static_cast<unsigned char*>(dst);
  while (bytes > 0) {
    const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(bytes, 1u << 30));
    const int got = gzread(f, out, chunk);
    if (got <= 0) {
      throw FormatError("'" + path.string() + "' is truncated or not a NIfTI file");
    }
    out += got;
    bytes -= static_cast<std::size_t>(got);
  }
}

std::size_t element_size(std::int16_t datatype) {
  switch (datatype) {
    case kUint8:
    case kInt8:
      return 1;
    case kInt16:
    case kUint16:
      return 2;
    case kInt32:
    case kUint32:
    case kFloat32:
      return 4;
    case kFloat64:
    case kInt64:
    case kUint64:
      return 8;
    default:
      return 0;
  }
}

template <typename T>
double decode(const unsigned char* p, bool swap) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if (swap) v = byteswap_value(v);
  return static_cast<double>(v);
}

double decode_element(const unsigned char* p, std::int16_t datatype, bool swap) {
  switch (datatype) {
    case kUint8: return decode<std::uint8_t>(p, swap);
    case kInt8: return decode<std::int8_t>(p, swap);
    case kInt16: return decode<std::int16_t>(p, swap);
    case kUint16: return decode<std::uint16_t>(p, swap);
    case kInt32: return decode<std::int32_t>(p, swap);
    case kUint32: return decode<std::uint32_t>(p, swap);
    case kInt64: return decode<std::int64_t>(p, swap);
    case kUint64: return decode<std::uint64_t>(p, swap);
    case kFloat32: return decode<float>(p, swap);
    case kFloat64: return decode<double>(p, swap);
    default: return 0.0;
  }
}

struct RawVolume {
  Shape3 shape;
  Spacing spacing;
  std::vector<double> values;
};

RawVolume read_volume(const std::filesystem::path& path) {
  GzHandle f = open_for_read(path);
  Nifti1Header h{};
  read_exact(f.get(), &h, sizeof(h), path);

  bool swap = false;
  if (h.sizeof_hdr != 348) {
    if (byteswap_value(h.sizeof_hdr) != 348) {
      throw FormatError("'" + path.string() + "' does not carry a NIfTI-1 header");
    }
    swap = true;
    swap_header(h);
  }
  if (std::memcmp(h.magic, "n+1", 4) != 0) {
    throw FormatError("'" + path.string() +
                      "' is not a single-file NIfTI-1 image (magic must be n+1)");
  }
  const int ndim = h.dim[0];
  if (ndim < 1 || ndim > 7) {
    throw FormatError("'" + path.string() + "' has an invalid dim[0]");
  }
  if (ndim < 3) {
    throw FormatError("'" + path.string() + "' is a " + std::to_string(ndim) +
                      "D image; a 3D volume is required");
  }
  for (int d = 4; d <= ndim; ++d) {
    if (h.dim[d] != 1) {
      throw FormatError("'" + path.string() + "' has more than one volume (dim[" +
                        std::to_string(d) + "] = " + std::to_string(h.dim[d]) + ")");
    }
  }
  for (int d = 1; d <= 3; ++d) {
    if (h.dim[d] < 1) {
      throw FormatError("'" + path.string() + "' has a non-positive extent on axis " +
                        std::to_string(d));
    }
  }
  const std::size_t elem = element_size(h.datatype);
  if (elem == 0) {
    throw FormatError("'" + path.string() + "' uses unsupported NIfTI datatype " +
                      std::to_string(h.datatype));
  }

  RawVolume out;
  out.shape = {static_cast<std::size_t>(h.dim[1]), static_cast<std::size_t>(h.dim[2]),
               static_cast<std::size_t>(h.dim[3])};
  out.spacing = {std::fabs(static_cast<double>(h.pixdim[1])),
                 std::fabs(static_cast<double>(h.pixdim[2])),
                 std::fabs(static_cast<double>(h.pixdim[3]))};

  const auto offset = static_cast<std::size_t>(h.vox_offset);
  if (offset < sizeof(h)) {
    throw FormatError("'" + path.string() + "' has vox_offset inside the header");
  }
  std::vector<unsigned char> skip(offset - sizeof(h));
  if (!skip.empty()) read_exact(f.get(), skip.data(), skip.size(), path);

  const std::size_t n = out.shape.voxels();
  std::vector<unsigned char> raw(n * elem);
  read_exact(f.get(), raw.data(), raw.size(), path);

  const bool scaled = std::isfinite(h.scl_slope) && h.scl_slope != 0.0f &&
                      !(h.scl_slope == 1.0f && h.scl_inter == 0.0f);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = decode_element(raw.data() + i * elem, h.datatype, swap);
    if (scaled) v = v * h.scl_slope + h.scl_inter;
    out.values[i] = v;
  }
  return out;
}

Nifti1Header make_header(const Shape3& shape, const Spacing& spacing, std::int16_t datatype,
                         std::int16_t bitpix) {
  Nifti1Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  h.dim[1] = static_cast<std::int16_t>(shape.h);
  h.dim[2] = static_cast<std::int16_t>(shape.w);
  h.dim[3] = static_cast<std::int16_t>(shape.s);
  for (int d = 4; d < 8; ++d) h.dim[d] = 1;
  h.datatype = datatype;
  h.bitpix = bitpix;
  h.pixdim[0] = 1.0f;
  for (int d = 0; d < 3; ++d) h.pixdim[d + 1] = static_cast<float>(spacing[d]);
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = kUnitsMm;
  std::strncpy(h.descrip, "fbseg", sizeof(h.descrip) - 1);
  h.qform_code = 1;
  h.sform_code = 1;
  h.srow_x[0] = h.pixdim[1];
  h.srow_y[1] = h.pixdim[2];
  h.srow_z[2] = h.pixdim[3];
  std::memcpy(h.magic, "n+1", 4);
  return h;
}

void write_volume(const std::filesystem::path& path, const Nifti1Header& header,
                  const void* payload, std::size_t bytes) {
  if (header.dim[1] <= 0 || header.dim[2] <= 0 || header.dim[3] <= 0) {
    throw ValidationError("volume extents do not fit a NIfTI-1 header");
  }
  const std::string mode = path.extension() == ".gz" ? "wb6" : "wb0T";
  GzHandle f(gzopen(path.c_str(), mode.c_str()));
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const char extension[4] = {0, 0, 0, 0};
  bool ok = gzwrite(f.get(), &header, sizeof(header)) == static_cast<int>(sizeof(header)) &&
            gzwrite(f.get(), extension, sizeof(extension)) == static_cast<int>(sizeof(extension));
  const auto* p = static_cast<const unsigned char*>(payload);
  while (ok && bytes > 0) {
    const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(bytes, 1u << 30));
    ok = gzwrite(f.get(), p, chunk) == static_cast<int>(chunk);
    p += chunk;
    bytes -= chunk;
  }
  if (gzclose(f.release()) != Z_OK || !ok) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

void check_extent(const Shape3& shape) {
  constexpr std::size_t kMax = 32767;
  if (shape.h > kMax || shape.w > kMax || shape.s > kMax) {
    throw ValidationError("volume " + to_string(shape) + " exceeds NIfTI-1 extent limits");
  }
}

}  // namespace

std::string nifti_stem(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (const char* ext : {".nii.gz", ".nii"}) {
    const std::string e(ext);
    if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0) {
      return name.substr(0, name.size() - e.size());
    }
  }
  return path.stem().string();
}

bool is_nifti_path(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  auto ends_with = [&](const std::string& e) {
    return name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0;
  };
  return ends_with(".nii.gz") || ends_with(".nii");
}

Stack load_stack(const std::filesystem::path& path) {
  RawVolume raw = read_volume(path);
  Stack stack;
  stack.voxels = Volume<float>(raw.shape);
  std::transform(raw.values.begin(), raw.values.end(), stack.voxels.values().begin(),
                 [](double v) { return static_cast<float>(v); });
  stack.spacing = raw.spacing;
  stack.identifier = nifti_stem(path);
  validate_stack(stack);
  return stack;
}

Mask load_mask(const std::filesystem::path& path) {
  RawVolume raw = read_volume(path);
  Mask mask;
  mask.voxels = Volume<std::uint8_t>(raw.shape);
  mask.spacing = raw.spacing;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const double v = raw.values[i];
    if (v != 0.0 && v != 1.0) {
      throw ValidationError("'" + path.string() + "' is not a binary mask (found value " +
                            std::to_string(v) + ")");
    }
    mask.voxels.values()[i] = static_cast<std::uint8_t>(v);
  }
  return mask;
}

void save_stack(const Stack& stack, const std::filesystem::path& path) {
  validate_stack(stack);
  check_extent(stack.shape());
  const Nifti1Header h = make_header(stack.shape(), stack.spacing, kFloat32, 32);
  write_volume(path, h, stack.voxels.data(), stack.voxels.size() * sizeof(float));
}

void save_mask(const Mask& mask, const Stack& reference, const std::filesystem::path& path) {
  validate_mask(mask, reference);
  check_extent(mask.shape());
  const Nifti1Header h = make_header(mask.shape(), reference.spacing, kUint8, 8);
  write_volume(path, h, mask.voxels.data(), mask.voxels.size());
}

void save_mask(const Mask& mask, const std::filesystem::path& path) {
  validate_mask(mask);
  check_extent(mask.shape());
  const Nifti1Header h = make_header(mask.shape(), mask.spacing, kUint8, 8);
  write_volume(path, h, mask.voxels.data(), mask.voxels.size());
}

}  // namespace fbseg
