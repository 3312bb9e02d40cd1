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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "corotk/mesh.hpp"
#include "phantoms.hpp"
#include "testing.hpp"

using namespace corotk;
using testing_support::TempDir;

namespace {

std::string binary_stl(const SurfaceMesh& m) {
  std::string out(80, '\0');
  auto put = [&](const auto& v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
  put(static_cast<std::uint32_t>(m.triangles.size()));
  for (const auto& t : m.triangles) {
    const float normal[3] = {0, 0, 0};
    put(normal);
    for (auto idx : t) {
      const float p[3] = {float(m.vertices[idx].x), float(m.vertices[idx].y), float(m.vertices[idx].z)};
      put(p);
    }
    put(static_cast<std::uint16_t>(0));
  }
  return out;
}

SurfaceMesh torus(double R, double r, int nu, int nv) {
  SurfaceMesh m;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = 2 * std::numbers::pi * i / nu, v = 2 * std::numbers::pi * j / nv;
      m.vertices.push_back({(R + r * std::cos(v)) * std::cos(u), r * std::sin(v), (R + r * std::cos(v)) * std::sin(u)});
    }
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>((i % nu) * nv + (j % nv)); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
      m.triangles.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
    }
  return m;
}

std::size_t count(const Volume& v) {
  std::size_t c = 0;
  for (float x : v.data()) c += x != 0.0f;
  return c;
}

}  // namespace

TEST(MeshIo, ObjRoundTripCube) {
  TempDir dir;
  const SurfaceMesh cube = phantom::box_mesh({0, 0, 0}, {1, 1, 1});
  save_mesh(cube, dir / "cube.obj");
  const auto loaded = load_mesh_checked(dir / "cube.obj");
  EXPECT_EQ(loaded.mesh.vertices.size(), 8u);
  EXPECT_EQ(loaded.mesh.triangles.size(), 12u);
  EXPECT_TRUE(loaded.watertight);
  EXPECT_EQ(loaded.mesh, cube);
}

TEST(MeshIo, ShortestDecimalsRoundTripExactly) {
  TempDir dir;
  SurfaceMesh m = phantom::icosphere({0.1, -3.3, 7.7}, 2.345678901234, 1);
  save_mesh(m, dir / "s.obj");
  EXPECT_EQ(load_mesh(dir / "s.obj"), m);
  EXPECT_EQ(to_obj(load_mesh(dir / "s.obj")), to_obj(m));
}

TEST(MeshIo, StlMatchesObjAfterWeld) {
  TempDir dir;
  const SurfaceMesh cube = phantom::box_mesh({0, 0, 0}, {10, 10, 10});
  testing_support::spit(dir / "cube.stl", binary_stl(cube));
  const SurfaceMesh stl = load_mesh(dir / "cube.stl");
  ASSERT_EQ(stl.vertices.size(), 8u);
  ASSERT_EQ(stl.triangles.size(), 12u);
  for (std::size_t t = 0; t < 12; ++t)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(stl.vertices[stl.triangles[t][c]], cube.vertices[cube.triangles[t][c]]);
}

TEST(MeshIo, AsciiStl) {
  TempDir dir;
  testing_support::spit(dir / "t.stl",
                        "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\n"
                        "endloop\nendfacet\nendsolid t\n");
  const auto r = load_mesh_checked(dir / "t.stl");
  EXPECT_EQ(r.mesh.triangles.size(), 1u);
  EXPECT_FALSE(r.watertight);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(MeshIo, BadIndexAndPolygonFan) {
  TempDir dir;
  testing_support::spit(dir / "bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n");
  EXPECT_COROTK_ERROR(load_mesh(dir / "bad.obj"), ErrorCode::format);
  testing_support::spit(dir / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4/1 -3/2 -2/3 -1/4\n");
  const SurfaceMesh quad = load_mesh(dir / "quad.obj");
  EXPECT_EQ(quad.triangles.size(), 2u);
  EXPECT_EQ(quad.triangles[1], (Triangle{0, 2, 3}));
}

TEST(MeshIo, DegenerateTrianglesDropped) {
  TempDir dir;
  testing_support::spit(dir / "d.obj", "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n");
  const auto r = load_mesh_checked(dir / "d.obj");
  EXPECT_EQ(r.mesh.triangles.size(), 1u);
}

TEST(Topology, WatertightAndOpen) {
  EXPECT_TRUE(check_topology(phantom::box_mesh({0, 0, 0}, {1, 1, 1})).watertight());
  SurfaceMesh open = phantom::box_mesh({0, 0, 0}, {1, 1, 1});
  open.triangles.pop_back();
  const auto r = check_topology(open);
  EXPECT_EQ(r.boundary_edges, 3u);
  EXPECT_COROTK_ERROR(require_watertight(open), ErrorCode::open_loop);
  EXPECT_TRUE(check_topology(cap_holes(open)).watertight());
}

TEST(Contours, CubeMidSlice) {
  const SurfaceMesh cube = phantom::box_mesh({0, 0, 0}, {10, 10, 10});
  const ContourSet c = slice_contours(cube, 5.0);
  ASSERT_EQ(c.polygons.size(), 1u);
  EXPECT_EQ(c.polygons[0].front(), c.polygons[0].back());
  EXPECT_NEAR(signed_area(c.polygons[0]), 100.0, 1e-9);
  for (const auto& p : c.polygons[0]) {
    const bool on_x = std::abs(p.x) < 1e-12 || std::abs(p.x - 10) < 1e-12;
    const bool on_y = std::abs(p.y) < 1e-12 || std::abs(p.y - 10) < 1e-12;
    EXPECT_TRUE(on_x || on_y);
  }
}

TEST(Contours, MissIsEmpty) {
  EXPECT_TRUE(slice_contours(phantom::box_mesh({0, 0, 0}, {10, 10, 10}), 20.0).polygons.empty());
}

TEST(Contours, TorusGivesTwoLoops) {
  const ContourSet c = slice_contours(torus(5.0, 1.5, 48, 24), 0.0);
  ASSERT_EQ(c.polygons.size(), 2u);
  for (const auto& loop : c.polygons) EXPECT_GT(signed_area(loop), 0.0);
}

TEST(Contours, HoleRunsClockwise) {
  // Horizontal torus (axis along z) sliced through its middle: outer and inner circles.
  SurfaceMesh t = torus(5.0, 1.5, 48, 24);
  for (auto& v : t.vertices) std::swap(v.y, v.z);
  for (auto& tri : t.triangles) std::swap(tri[1], tri[2]);
  const ContourSet c = slice_contours(t, 0.01);
  ASSERT_EQ(c.polygons.size(), 2u);
  const double a0 = signed_area(c.polygons[0]), a1 = signed_area(c.polygons[1]);
  EXPECT_LT(std::min(a0, a1), 0.0);
  EXPECT_GT(std::max(a0, a1), 0.0);
  EXPECT_NEAR(total_signed_area(c), std::numbers::pi * (6.5 * 6.5 - 3.5 * 3.5), 2.0);
}

TEST(Contours, OpenMeshRaises) {
  SurfaceMesh open = phantom::box_mesh({0, 0, 0}, {1, 1, 1});
  open.triangles.erase(open.triangles.begin() + 4, open.triangles.begin() + 6);
  EXPECT_COROTK_ERROR(slice_contours(open, 0.5), ErrorCode::open_loop);
}

TEST(Voxelize, CubeCenterRule) {
  const Volume v = voxelize(phantom::box_mesh({0.5, 0.5, 0.5}, {10.5, 10.5, 10.5}), phantom::grid({12, 12, 12}));
  EXPECT_EQ(count(v), 1000u);
  EXPECT_EQ(v.kind(), VoxelKind::label);
  EXPECT_EQ(v.at(0, 5, 5), 0.0f);
  EXPECT_EQ(v.at(1, 5, 5), 1.0f);
  EXPECT_EQ(v.at(10, 10, 10), 1.0f);
  EXPECT_EQ(v.at(11, 10, 10), 0.0f);
}

TEST(Voxelize, CubeFacesOnVoxelCenters) {
  // Faces through centers: the parity rule must still give a consistent, hole-free block.
  const Volume v = voxelize(phantom::box_mesh({1, 1, 1}, {5, 5, 5}), phantom::grid({7, 7, 7}));
  const std::size_t n = count(v);
  EXPECT_TRUE(n == 64u || n == 125u || n == 80u || n == 100u) << n;
}

TEST(Voxelize, OutsideGridIsEmpty) {
  const Volume v = voxelize(phantom::box_mesh({50, 50, 50}, {60, 60, 60}), phantom::grid({8, 8, 8}));
  EXPECT_EQ(count(v), 0u);
}

TEST(Voxelize, SphereVolumeConverges) {
  const SurfaceMesh s = phantom::icosphere({0, 0, 0}, 5.0, 4);
  const double analytic = 4.0 / 3.0 * std::numbers::pi * 125.0;
  const double enclosed = std::abs(mesh_volume(s));
  auto voxel_volume = [&](double h) {
    const auto n = static_cast<std::int64_t>(std::ceil(12.0 / h));
    const Volume v = voxelize(s, phantom::grid({n, n, n}, h, {-6, -6, -6}));
    return double(count(v)) * h * h * h;
  };
  const double fine = voxel_volume(0.2), coarse = voxel_volume(0.4);
  EXPECT_LT(std::abs(fine - analytic) / analytic, 0.02);
  EXPECT_LT(std::abs(fine - enclosed), std::abs(coarse - enclosed));
}

TEST(Voxelize, RigidCoTransformIsInvariant) {
  const SurfaceMesh s = phantom::icosphere({2, 1, 3}, 3.0, 2);
  const Grid g = phantom::grid({20, 20, 20}, 0.5, {-3, -4, -2});
  const Volume base = voxelize(s, g);
  const Rigid t{Quat::from_axis_angle({0, 0, 1}, std::numbers::pi / 2), {4, -1, 2}};
  Grid moved = g;
  moved.origin = t.apply(g.origin);
  moved.direction = t.rotation.to_matrix() * g.direction;
  const Volume other = voxelize(transformed(s, t), moved);
  EXPECT_EQ(foreground(other), foreground(base));
}

TEST(Voxelize, NotWatertightRaises) {
  SurfaceMesh open = phantom::box_mesh({0, 0, 0}, {3, 3, 3});
  open.triangles.pop_back();
  EXPECT_COROTK_ERROR(voxelize(open, phantom::grid({4, 4, 4})), ErrorCode::open_loop);
}

TEST(Voxelize, ContourAreaMatchesMaskSlice) {
  const SurfaceMesh s = phantom::icosphere({0, 0, 0}, 5.0, 4);
  const double h = 0.25;
  const Grid g = phantom::grid({48, 48, 48}, h, {-6, -6, -6});
  const Volume v = voxelize(s, g);
  for (std::int64_t k : {10, 24, 30}) {
    const double z = g.origin.z + h * double(k);
    std::size_t in_plane = 0;
    for (std::int64_t j = 0; j < 48; ++j)
      for (std::int64_t i = 0; i < 48; ++i) in_plane += v.at(i, j, k) != 0.0f;
    const double area = total_signed_area(slice_contours(s, z));
    const double radius = std::sqrt(std::max(0.0, 25.0 - z * z));
    // One voxel layer of tolerance around the perimeter.
    EXPECT_NEAR(double(in_plane) * h * h, area, 2 * std::numbers::pi * radius * h + h * h) << k;
  }
}

TEST(MeshVolume, ClosedBox) {
  EXPECT_NEAR(std::abs(mesh_volume(phantom::box_mesh({0, 0, 0}, {2, 3, 4}))), 24.0, 1e-12);
}

TEST(CapHoles, OpenTubeBecomesClosedWithAveragedWeights) {
  SurfaceMesh tube = phantom::tube_mesh({0, 0, 0}, 10.0, 1.0, 12, 5);
  tube.triangles.resize(tube.triangles.size() - 24);  // drop both caps
  tube.vertices.resize(tube.vertices.size() - 2);
  tube.weights.assign(tube.vertices.size(), {BoneWeight{0, 1.0}});
  const SurfaceMesh capped = cap_holes(tube);
  EXPECT_TRUE(check_topology(capped).watertight());
  EXPECT_EQ(capped.vertices.size(), tube.vertices.size() + 2);
  ASSERT_EQ(capped.weights.size(), capped.vertices.size());
  EXPECT_NEAR(capped.weights.back()[0].weight, 1.0, 1e-12);
  EXPECT_EQ(cap_holes(capped), capped);
}

TEST(Contours, PlaneThroughVertexRingKeepsOrientation) {
  const SurfaceMesh tube = phantom::tube_mesh({0, 0, 0}, 10.0, 1.0, 12, 5);  // rings at z = 0, 2.5, 5, ...
  const double hexagon_like = 0.5 * 12 * std::sin(2.0 * M_PI / 12);
  EXPECT_NEAR(total_signed_area(slice_contours(tube, 5.0)), hexagon_like, 1e-12);
  EXPECT_NEAR(total_signed_area(slice_contours(tube, 5.0 + 1e-9)), hexagon_like, 1e-6);
}
