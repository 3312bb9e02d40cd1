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

#include "corotk/resample.hpp"

#include <algorithm>
#include <cmath>

#include "corotk/error.hpp"

namespace corotk {
namespace {

double lerp_axis(const Volume& v, std::int64_t i0, std::int64_t i1, std::int64_t j0, std::int64_t j1,
                 std::int64_t k0, std::int64_t k1, double fx, double fy, double fz) {
  const double c00 = v.at(i0, j0, k0) * (1.0 - fx) + v.at(i1, j0, k0) * fx;
  const double c10 = v.at(i0, j1, k0) * (1.0 - fx) + v.at(i1, j1, k0) * fx;
  const double c01 = v.at(i0, j0, k1) * (1.0 - fx) + v.at(i1, j0, k1) * fx;
  const double c11 = v.at(i0, j1, k1) * (1.0 - fx) + v.at(i1, j1, k1) * fx;
  const double c0 = c00 * (1.0 - fy) + c10 * fy;
  const double c1 = c01 * (1.0 - fy) + c11 * fy;
  return c0 * (1.0 - fz) + c1 * fz;
}

struct AxisWeight {
  std::int64_t lo;
  std::int64_t hi;
  double frac;
};

AxisWeight axis_weight(double pos, std::int64_t n) {
  if (n == 1) return {0, 0, 0.0};
  const double p = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  auto lo = static_cast<std::int64_t>(std::floor(p));
  if (lo >= n - 1) lo = n - 2;
  return {lo, lo + 1, p - static_cast<double>(lo)};
}

}  // namespace

double sample_trilinear_clamped(const Volume& volume, Vec3 index) {
  const auto& d = volume.dims();
  const AxisWeight ax = axis_weight(index.x, d[0]);
  const AxisWeight ay = axis_weight(index.y, d[1]);
  const AxisWeight az = axis_weight(index.z, d[2]);
  return lerp_axis(volume, ax.lo, ax.hi, ay.lo, ay.hi, az.lo, az.hi, ax.frac, ay.frac, az.frac);
}

double sample_trilinear(const Volume& volume, Vec3 index, double outside) {
  const auto& d = volume.dims();
  constexpr double kSlack = 1e-9;
  for (int a = 0; a < 3; ++a)
    if (!(index[a] >= -kSlack && index[a] <= static_cast<double>(d[a] - 1) + kSlack)) return outside;
  return sample_trilinear_clamped(volume, index);
}

Volume resample(const Volume& volume, std::array<double, 3> target_spacing, Interpolation mode) {
  for (double s : target_spacing)
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::input, "target spacing must be positive");
  if (volume.kind() == VoxelKind::label && mode != Interpolation::nearest)
    throw Error(ErrorCode::mode, "label volumes must be resampled with nearest");

  const Grid& in = volume.grid();
  Grid out = in;
  std::array<double, 3> step{};
  for (int a = 0; a < 3; ++a) {
    out.spacing[a] = target_spacing[a];
    const double extent = static_cast<double>(in.dims[a]) * in.spacing[a] / target_spacing[a];
    // Guard against 4.0000000001 -> 5 from rounding in the ratio.
    out.dims[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent - 1e-9)));
    step[a] = target_spacing[a] / in.spacing[a];
  }

  std::vector<float> data(out.voxel_count());
  std::size_t n = 0;
  for (std::int64_t k = 0; k < out.dims[2]; ++k) {
    for (std::int64_t j = 0; j < out.dims[1]; ++j) {
      for (std::int64_t i = 0; i < out.dims[0]; ++i, ++n) {
        const Vec3 pos{static_cast<double>(i) * step[0], static_cast<double>(j) * step[1],
                       static_cast<double>(k) * step[2]};
        if (mode == Interpolation::nearest) {
          std::int64_t idx[3];
          for (int a = 0; a < 3; ++a)
            idx[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(pos[a] + 0.5)), 0,
                                              in.dims[a] - 1);
          data[n] = volume.at(idx[0], idx[1], idx[2]);
        } else {
          data[n] = static_cast<float>(sample_trilinear_clamped(volume, pos));
        }
      }
    }
  }
  return Volume(out, volume.kind(), std::move(data), volume.dtype());
}

}  // namespace corotk
