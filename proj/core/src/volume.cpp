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

#include "corotk/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corotk/error.hpp"

namespace corotk {

Vec3 Grid::to_physical(Vec3 index) const {
  const Vec3 scaled{index.x * spacing[0], index.y * spacing[1], index.z * spacing[2]};
  return origin + direction * scaled;
}

Vec3 Grid::to_index(Vec3 physical) const {
  const Vec3 local = transpose(direction) * (physical - origin);
  return {local.x / spacing[0], local.y / spacing[1], local.z / spacing[2]};
}

bool Grid::same_as(const Grid& other, double tol) const {
  if (dims != other.dims) return false;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(spacing[a] - other.spacing[a]) > tol) return false;
    if (std::abs(origin[a] - other.origin[a]) > tol) return false;
    for (int b = 0; b < 3; ++b)
      if (std::abs(direction(a, b) - other.direction(a, b)) > tol) return false;
  }
  return true;
}

void Grid::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) throw Error(ErrorCode::input, "dims must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw Error(ErrorCode::input, "spacing must be strictly positive");
    if (!std::isfinite(origin[a])) throw Error(ErrorCode::input, "origin must be finite");
  }
  if (orthonormality_error(direction) > 1e-6)
    throw Error(ErrorCode::input, "direction matrix is not orthonormal");
}

DataType default_dtype(VoxelKind kind) {
  return kind == VoxelKind::label ? DataType::uint8 : DataType::float32;
}

Volume::Volume(Grid grid, VoxelKind kind, std::vector<float> data, DataType dtype)
    : grid_(grid), kind_(kind), dtype_(dtype), data_(std::move(data)) {
  grid_.validate();
  if (data_.size() != grid_.voxel_count())
    throw Error(ErrorCode::input, "data length " + std::to_string(data_.size()) +
                                      " does not match dims product " +
                                      std::to_string(grid_.voxel_count()));
  if (kind_ == VoxelKind::label) {
    for (float v : data_)
      if (!(v >= 0.0f) || v != std::floor(v))
        throw Error(ErrorCode::input, "label volumes hold non-negative integers only");
    if (dtype_ == DataType::float32) dtype_ = DataType::int16;
    const float limit = dtype_ == DataType::uint8 ? 255.0f : 32767.0f;
    if (std::any_of(data_.begin(), data_.end(), [&](float v) { return v > limit; }))
      dtype_ = DataType::int16;
  }
}

Volume::Volume(Grid grid, VoxelKind kind, std::vector<float> data)
    : Volume(grid, kind, std::move(data), default_dtype(kind)) {}

Volume Volume::zeros(const Grid& grid, VoxelKind kind) {
  return Volume(grid, kind, std::vector<float>(grid.voxel_count(), 0.0f));
}

Volume Volume::with_data(std::vector<float> data) const {
  return Volume(grid_, kind_, std::move(data), dtype_);
}

Volume Volume::with_data(std::vector<float> data, VoxelKind kind, DataType dtype) const {
  return Volume(grid_, kind, std::move(data), dtype);
}

bool Volume::is_binary() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return v == 0.0f || v == 1.0f; });
}

std::vector<std::uint8_t> foreground(const Volume& mask) {
  if (mask.kind() != VoxelKind::label) throw Error(ErrorCode::input, "expected a label volume");
  std::vector<std::uint8_t> bits(mask.size());
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const float v = mask[n];
    if (v != 0.0f && v != 1.0f) throw Error(ErrorCode::input, "mask is not binary");
    bits[n] = v != 0.0f;
  }
  return bits;
}

Volume mask_from(const Grid& grid, std::span<const std::uint8_t> bits) {
  std::vector<float> data(bits.size());
  std::transform(bits.begin(), bits.end(), data.begin(), [](std::uint8_t b) { return b ? 1.0f : 0.0f; });
  return Volume(grid, VoxelKind::label, std::move(data), DataType::uint8);
}

}  // namespace corotk
