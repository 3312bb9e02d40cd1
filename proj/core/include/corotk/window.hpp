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

#include <cstdint>
#include <vector>

#include "corotk/volume.hpp"

namespace corotk {

// Display window in HU, low < high.
struct WindowSpec {
  double low = -120.0;
  double high = 200.0;

  void validate() const;
};

// Display presets for non-contrast and contrast CT.
inline constexpr WindowSpec kNonContrastWindow{-120.0, 200.0};
inline constexpr WindowSpec kContrastWindow{-120.0, 800.0};

struct GrayImage {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::int64_t depth = 1;
  std::vector<std::uint8_t> pixels;  // x-fastest
};

// Linear [low, high] -> [0, 255], clamped, round half up.
std::uint8_t window_value(double hu, const WindowSpec& w);

GrayImage window_to_gray(const Volume& volume, const WindowSpec& w);
// Axial slice k (z index) only.
GrayImage window_slice(const Volume& volume, std::int64_t k, const WindowSpec& w);
// Arbitrary 2D float image (rows x cols, row-major).
GrayImage window_pixels(const std::vector<double>& values, std::int64_t cols, std::int64_t rows,
                        const WindowSpec& w);

}  // namespace corotk
