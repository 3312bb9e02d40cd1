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

#include "corotk/components.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "corotk/error.hpp"

namespace corotk {
namespace {

std::vector<std::array<int, 3>> neighbor_offsets(Connectivity c) {
  std::vector<std::array<int, 3>> offs;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (c == Connectivity::six && manhattan != 1) continue;
        offs.push_back({dx, dy, dz});
      }
  return offs;
}

}  // namespace

void require_same_grid(const Volume& a, const Volume& b) {
  if (!a.grid().same_as(b.grid(), 1e-6))
    throw Error(ErrorCode::geometry, "volumes are not on the same grid");
}

std::vector<std::int32_t> label_bits(std::span<const std::uint8_t> bits, const Index3& dims,
                                     Connectivity connectivity, std::int64_t& count) {
  const auto offs = neighbor_offsets(connectivity);
  std::vector<std::int32_t> labels(bits.size(), 0);
  const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
  std::vector<std::int64_t> stack;
  count = 0;
  for (std::size_t start = 0; start < bits.size(); ++start) {
    if (!bits[start] || labels[start] != 0) continue;
    const auto label = static_cast<std::int32_t>(++count);
    labels[start] = label;
    stack.assign(1, static_cast<std::int64_t>(start));
    while (!stack.empty()) {
      const std::int64_t n = stack.back();
      stack.pop_back();
      const std::int64_t x = n % nx, y = (n / nx) % ny, z = n / (nx * ny);
      for (const auto& o : offs) {
        const std::int64_t xx = x + o[0], yy = y + o[1], zz = z + o[2];
        if (xx < 0 || yy < 0 || zz < 0 || xx >= nx || yy >= ny || zz >= nz) continue;
        const std::int64_t m = xx + nx * (yy + ny * zz);
        if (bits[m] && labels[m] == 0) {
          labels[m] = label;
          stack.push_back(m);
        }
      }
    }
  }
  return labels;
}

ComponentTable label_components(const Volume& mask, Connectivity connectivity) {
  const auto bits = foreground(mask);
  const Grid& g = mask.grid();
  ComponentTable table;
  const auto labels = label_bits(bits, g.dims, connectivity, table.count);
  table.components.resize(static_cast<std::size_t>(table.count));
  for (auto& c : table.components)
    c.bbox = {g.dims[0], g.dims[1], g.dims[2], -1, -1, -1};

  std::vector<float> data(labels.size(), 0.0f);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] == 0) continue;
    data[n] = static_cast<float>(labels[n]);
    auto& c = table.components[static_cast<std::size_t>(labels[n] - 1)];
    ++c.voxel_count;
    const Index3 ijk = g.unlinear(n);
    for (int a = 0; a < 3; ++a) {
      c.bbox[a] = std::min(c.bbox[a], ijk[a]);
      c.bbox[a + 3] = std::max(c.bbox[a + 3], ijk[a]);
    }
  }
  const double voxel = g.voxel_volume();
  for (auto& c : table.components) c.volume_mm3 = static_cast<double>(c.voxel_count) * voxel;
  const DataType dtype = table.count <= 255 ? DataType::uint8 : DataType::int16;
  table.labels = Volume(g, VoxelKind::label, std::move(data), dtype);
  return table;
}

Volume filter_small(const Volume& mask, double min_volume_mm3, Connectivity connectivity) {
  if (!(min_volume_mm3 >= 0.0)) throw Error(ErrorCode::input, "threshold must be non-negative");
  const auto bits = foreground(mask);
  std::int64_t count = 0;
  const auto labels = label_bits(bits, mask.dims(), connectivity, count);
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(count) + 1, 0);
  for (auto l : labels) ++sizes[static_cast<std::size_t>(l)];
  const double voxel = mask.grid().voxel_volume();
  std::vector<std::uint8_t> out(bits.size(), 0);
  for (std::size_t n = 0; n < bits.size(); ++n) {
    const auto l = static_cast<std::size_t>(labels[n]);
    if (l != 0 && !(static_cast<double>(sizes[l]) * voxel < min_volume_mm3)) out[n] = 1;
  }
  return mask_from(mask.grid(), out);
}

Volume filter_outside(const Volume& mask, const Volume& region, Connectivity connectivity) {
  require_same_grid(mask, region);
  const auto bits = foreground(mask);
  const auto region_data = region.data();
  std::int64_t count = 0;
  const auto labels = label_bits(bits, mask.dims(), connectivity, count);
  std::vector<std::uint8_t> touches(static_cast<std::size_t>(count) + 1, 0);
  for (std::size_t n = 0; n < bits.size(); ++n)
    if (labels[n] != 0 && region_data[n] != 0.0f) touches[static_cast<std::size_t>(labels[n])] = 1;
  std::vector<std::uint8_t> out(bits.size(), 0);
  for (std::size_t n = 0; n < bits.size(); ++n)
    if (labels[n] != 0 && touches[static_cast<std::size_t>(labels[n])]) out[n] = 1;
  return mask_from(mask.grid(), out);
}

}  // namespace corotk
