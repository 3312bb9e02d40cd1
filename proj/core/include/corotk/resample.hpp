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

#include <array>

#include "corotk/volume.hpp"

namespace corotk {

enum class Interpolation { nearest, trilinear };

// Resamples onto a grid with the same origin and direction and spacing
// `target_spacing`; output dims = ceil(dims * spacing / target_spacing).
// Samples past the last input voxel center clamp to the border value.
// Label volumes only accept nearest (Error(mode) otherwise).
Volume resample(const Volume& volume, std::array<double, 3> target_spacing, Interpolation mode);

// Trilinear sample at a continuous index with border clamping.
double sample_trilinear_clamped(const Volume& volume, Vec3 index);
// Trilinear sample; returns `outside` when the index lies beyond [0, dims-1] on any axis.
double sample_trilinear(const Volume& volume, Vec3 index, double outside);

}  // namespace corotk
