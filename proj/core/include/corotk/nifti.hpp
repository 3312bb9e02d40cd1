// Copyright 2026 The corotk Authors
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

#include "corotk/volume.hpp"

namespace corotk {

// How to classify the voxels of a file being read.
//   automatic: label if intent is NIFTI_INTENT_LABEL or the datatype is uint8,
//              intensity otherwise.
enum class KindHint { automatic, intensity, label };

// Reads a NIfTI-1 single file (.nii, optionally gzip-compressed).
// Supported datatypes: uint8, int16, float32, either byte order.
// Orientation comes from qform when qform_code > 0, else sform, else identity.
Volume read_volume(const std::filesystem::path& path, KindHint hint = KindHint::automatic);

// Writes NIfTI-1; gzip compression when the name ends in ".gz".
// Header geometry is stored at float32 precision, so a round trip is exact only for
// spacing/origin values representable as float.
void write_volume(const Volume& volume, const std::filesystem::path& path);

}  // namespace corotk
