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
#include <string>

#include "fbseg/volume.hpp"

namespace fbseg {

// Reads a NIfTI-1 volume (.nii or .nii.gz). Intensities are converted to
// float32 after applying the header scaling; spacing comes from pixdim[1..3].
// The identifier is the filename with its NIfTI extension removed.
//
// Throws IoError if the file cannot be opened, FormatError for anything that
// is not a 3D single-volume NIfTI-1 image, ValidationError for non-finite
// voxels or non-positive spacing.
Stack load_stack(const std::filesystem::path& path);

// Reads a binary mask. Same rules as load_stack, and every voxel must be
// exactly 0 or 1 after scaling.
Mask load_mask(const std::filesystem::path& path);

// Writes a gzip-compressed NIfTI-1 file with float32 voxels.
void save_stack(const Stack& stack, const std::filesystem::path& path);

// Writes a mask as uint8 using the reference stack's spacing.
void save_mask(const Mask& mask, const Stack& reference, const std::filesystem::path& path);
void save_mask(const Mask& mask, const std::filesystem::path& path);

// "sub-01_T2w.nii.gz" -> "sub-01_T2w"; also strips a plain ".nii".
std::string nifti_stem(const std::filesystem::path& path);

bool is_nifti_path(const std::filesystem::path& path);

}  // namespace fbseg
