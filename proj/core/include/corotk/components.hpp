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
#include <cstdint>
#include <span>
#include <vector>

#include "corotk/volume.hpp"

namespace corotk {

enum class Connectivity { six = 6, twenty_six = 26 };

struct ComponentInfo {
  std::int64_t voxel_count = 0;
  double volume_mm3 = 0.0;
  // min i, j, k then max i, j, k (inclusive).
  std::array<std::int64_t, 6> bbox{};
};

struct ComponentTable {
  Volume labels;               // 0 background, 1..count components
  std::int64_t count = 0;
  std::vector<ComponentInfo> components;  // components[l - 1] describes label l
};

// Labels are assigned in order of each component's first voxel in x-fastest scan order.
ComponentTable label_components(const Volume& mask, Connectivity connectivity = Connectivity::twenty_six);

// Raw labeling of a 0/1 buffer; returns per-voxel labels and the component count.
std::vector<std::int32_t> label_bits(std::span<const std::uint8_t> bits, const Index3& dims,
                                     Connectivity connectivity, std::int64_t& count);

// Drops components whose physical volume is strictly below `min_volume_mm3`.
Volume filter_small(const Volume& mask, double min_volume_mm3,
                    Connectivity connectivity = Connectivity::twenty_six);

// Drops components that share no voxel with `region` (any nonzero voxel counts as
// inside). Both volumes must share a grid.
Volume filter_outside(const Volume& mask, const Volume& region,
                      Connectivity connectivity = Connectivity::twenty_six);

// Throws Error(geometry) unless the grids match within 1e-6.
void require_same_grid(const Volume& a, const Volume& b);

}  // namespace corotk
