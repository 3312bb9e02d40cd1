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
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "corotk/geometry.hpp"

namespace corotk {

enum class VoxelKind { intensity, label };

// On-disk sample type; also the preferred type when writing.
enum class DataType { uint8, int16, float32 };

using Index3 = std::array<std::int64_t, 3>;

// Placement of a voxel grid in physical (mm) space:
//   p = origin + direction * (spacing ⊙ index).
struct Grid {
  Index3 dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  Vec3 origin{};
  Mat3 direction = Mat3::identity();

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0] * dims[1] * dims[2]);
  }
  double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

  std::size_t linear(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k));
  }
  Index3 unlinear(std::size_t n) const {
    const auto s = static_cast<std::int64_t>(n);
    return {s % dims[0], (s / dims[0]) % dims[1], s / (dims[0] * dims[1])};
  }
  bool contains(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }

  // Continuous index -> physical mm.
  Vec3 to_physical(Vec3 index) const;
  // Physical mm -> continuous index.
  Vec3 to_index(Vec3 physical) const;

  // dims equal, spacing/origin/direction equal within `tol`.
  bool same_as(const Grid& other, double tol = 1e-6) const;
  // Throws Error(input) on non-positive dims/spacing or non-orthonormal direction.
  void validate() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

// Immutable 3D scalar image stored x-fastest.
class Volume {
 public:
  Volume() = default;
  // Validates every invariant; throws Error(input) on violation.
  Volume(Grid grid, VoxelKind kind, std::vector<float> data, DataType dtype);
  Volume(Grid grid, VoxelKind kind, std::vector<float> data);

  // Zero-filled volume on `grid`.
  static Volume zeros(const Grid& grid, VoxelKind kind);

  const Grid& grid() const { return grid_; }
  const Index3& dims() const { return grid_.dims; }
  VoxelKind kind() const { return kind_; }
  DataType dtype() const { return dtype_; }
  std::span<const float> data() const { return data_; }
  std::size_t size() const { return data_.size(); }

  float operator[](std::size_t n) const { return data_[n]; }
  float at(std::int64_t i, std::int64_t j, std::int64_t k) const { return data_[grid_.linear(i, j, k)]; }

  // New volume on the same grid; kind and dtype carried over unless given.
  Volume with_data(std::vector<float> data) const;
  Volume with_data(std::vector<float> data, VoxelKind kind, DataType dtype) const;

  bool is_binary() const;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Grid grid_;
  VoxelKind kind_ = VoxelKind::intensity;
  DataType dtype_ = DataType::float32;
  std::vector<float> data_{0.0f};
};

DataType default_dtype(VoxelKind kind);

// 0/1 foreground view of a binary label volume. Throws Error(input) if not binary
// or not a label volume.
std::vector<std::uint8_t> foreground(const Volume& mask);

// Binary label volume on `grid` from a 0/1 buffer.
Volume mask_from(const Grid& grid, std::span<const std::uint8_t> bits);

}  // namespace corotk
