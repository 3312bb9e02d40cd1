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
#include <filesystem>
#include <string>
#include <vector>

#include "corotk/geometry.hpp"
#include "corotk/volume.hpp"

namespace corotk {

struct BoneWeight {
  int bone = 0;
  double weight = 0.0;

  friend bool operator==(const BoneWeight&, const BoneWeight&) = default;
};

using Triangle = std::array<std::uint32_t, 3>;

struct SurfaceMesh {
  std::vector<Vec3> vertices;  // mm, CT physical frame
  std::vector<Triangle> triangles;
  // Either empty or one list per vertex, weights >= 0 summing to 1.
  std::vector<std::vector<BoneWeight>> weights;

  bool has_weights() const { return !weights.empty(); }
  friend bool operator==(const SurfaceMesh&, const SurfaceMesh&) = default;
};

// Undirected edges used by a single triangle or by more than two.
struct TopologyReport {
  std::size_t boundary_edges = 0;
  std::size_t nonmanifold_edges = 0;

  bool watertight() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
};

TopologyReport check_topology(const SurfaceMesh& mesh);
// Throws Error(open_loop) when the mesh is not a closed 2-manifold.
void require_watertight(const SurfaceMesh& mesh);

struct MeshLoadResult {
  SurfaceMesh mesh;
  std::vector<std::string> warnings;  // empty mesh, open or non-manifold edges, dropped triangles
  bool watertight = false;
};

// OBJ (ASCII) or STL (binary or ASCII), chosen by extension. Zero-area triangles are
// dropped; STL vertices are merged within 1e-6 mm. Bad indices -> Error(format).
MeshLoadResult load_mesh_checked(const std::filesystem::path& path);
SurfaceMesh load_mesh(const std::filesystem::path& path);
// OBJ with shortest round-trip decimal coordinates.
void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path);
std::string to_obj(const SurfaceMesh& mesh);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct ContourSet {
  std::int64_t slice_index = -1;  // set when the plane came from a volume slice
  double z_mm = 0.0;
  // Closed loops (first point repeated at the end). Outer boundaries run
  // counter-clockwise seen from +z, holes clockwise.
  std::vector<std::vector<Vec2>> polygons;

  friend bool operator==(const ContourSet&, const ContourSet&) = default;
};

// Intersection with the plane z = z_mm. Vertices on the plane count as above it.
// Error(open_loop) lists the unclosed chains for a mesh with boundary.
ContourSet slice_contours(const SurfaceMesh& mesh, double z_mm);

double signed_area(const std::vector<Vec2>& loop);
double total_signed_area(const ContourSet& contours);

// Voxel set iff its center lies inside the mesh by ray parity (rays along the grid's
// k axis; columns with degenerate hits are re-cast from slightly perturbed origins).
Volume voxelize(const SurfaceMesh& mesh, const Grid& grid);

// Enclosed volume via the divergence theorem (positive for outward-facing triangles).
double mesh_volume(const SurfaceMesh& mesh);

SurfaceMesh transformed(const SurfaceMesh& mesh, const Rigid& t);

// Fills each boundary loop with a fan around its centroid. The centroid vertex
// takes the averaged (renormalized) weights of its loop.
SurfaceMesh cap_holes(const SurfaceMesh& mesh);

}  // namespace corotk
