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

#include "corotk/geometry.hpp"
#include "corotk/volume.hpp"

namespace corotk {

inline constexpr double kOutsideHu = -1024.0;

struct Frame {
  Vec3 point;
  Vec3 tangent;
  Vec3 normal;
  Vec3 binormal;  // tangent x normal
};

struct CprImage {
  std::int64_t rows = 0;  // arclength samples
  std::int64_t cols = 0;  // transverse samples, centered on the path
  double ds = 0.0;
  double dt = 0.0;
  double half_width = 0.0;
  std::vector<double> pixels;  // row-major, HU
  std::vector<Frame> frames;   // one per row

  double at(std::int64_t row, std::int64_t col) const { return pixels[static_cast<std::size_t>(row * cols + col)]; }
};

struct PlaneImage {
  std::int64_t size = 0;  // square, size x size
  std::vector<double> pixels;  // row index along binormal, column along normal
  Frame frame;
};

double path_length(const std::vector<Vec3>& path);

// Frames at the given increasing arclength positions. Tangents come from central
// differences over +-`smoothing_mm`; normals are carried by double reflection.
std::vector<Frame> rotation_minimizing_frames(const std::vector<Vec3>& path, const std::vector<double>& arclengths,
                                              double smoothing_mm = 0.5);

// Stretched CPR: row i at arclength i*ds, column j at offset (j - m)*dt along the
// normal with m = floor(half_width/dt). Samples outside the volume get -1024 HU.
CprImage cpr(const Volume& volume, const std::vector<Vec3>& path, double half_width_mm = 5.0, double ds = 0.35,
             double dt = 0.35);

// Square cross-section orthogonal to the path at arclength s (0 <= s <= length).
PlaneImage short_axis_cut(const Volume& volume, const std::vector<Vec3>& path, double s_mm,
                          double half_width_mm = 5.0, double dt = 0.35);

}  // namespace corotk
