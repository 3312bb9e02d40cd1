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

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "corotk/mesh.hpp"
#include "corotk/skeleton.hpp"
#include "corotk/volume.hpp"

namespace phantom {

using corotk::Grid;
using corotk::Index3;
using corotk::Vec3;

inline Grid grid(Index3 dims, double spacing = 1.0, Vec3 origin = {}) {
  Grid g;
  g.dims = dims;
  g.spacing = {spacing, spacing, spacing};
  g.origin = origin;
  return g;
}

struct Bits {
  Index3 dims;
  std::vector<std::uint8_t> v;

  explicit Bits(Index3 d) : dims(d), v(static_cast<std::size_t>(d[0] * d[1] * d[2]), 0) {}
  std::uint8_t& at(std::int64_t i, std::int64_t j, std::int64_t k) {
    return v[static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k))];
  }
  bool inside(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  void box(Index3 lo, Index3 hi) {  // inclusive
    for (auto k = lo[2]; k <= hi[2]; ++k)
      for (auto j = lo[1]; j <= hi[1]; ++j)
        for (auto i = lo[0]; i <= hi[0]; ++i)
          if (inside(i, j, k)) at(i, j, k) = 1;
  }
  // Every voxel whose center lies within r of segment [a, b] (index units).
  void capsule(Vec3 a, Vec3 b, double r) {
    for (std::int64_t k = 0; k < dims[2]; ++k)
      for (std::int64_t j = 0; j < dims[1]; ++j)
        for (std::int64_t i = 0; i < dims[0]; ++i)
          if (corotk::point_segment_distance({double(i), double(j), double(k)}, a, b) <= r) at(i, j, k) = 1;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : v) c += x;
    return c;
  }
  corotk::Volume volume(double spacing = 1.0) const { return corotk::mask_from(grid(dims, spacing), v); }
};

// A straight tube along a random axis or a Y of three capsules, inside a 32^3 box.
inline Bits tube_or_y(std::mt19937& rng) {
  Bits b({32, 32, 32});
  std::uniform_real_distribution<double> radius(1.0, 2.6);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_real_distribution<double> jitter(-3.0, 3.0);
  if (coin(rng) == 0) {
    const int axis = std::uniform_int_distribution<int>(0, 2)(rng);
    Vec3 a{16 + jitter(rng), 16 + jitter(rng), 16 + jitter(rng)}, c = a;
    a[axis] = 4;
    c[axis] = 27;
    b.capsule(a, c, radius(rng));
  } else {
    const Vec3 hub{16 + jitter(rng), 16 + jitter(rng), 16 + jitter(rng)};
    const double r = radius(rng);
    b.capsule({hub.x, hub.y, 3.0}, hub, r);
    b.capsule(hub, {4.0 + jitter(rng), hub.y + jitter(rng), 28.0}, r);
    b.capsule(hub, {28.0 + jitter(rng), hub.y + jitter(rng), 28.0}, r);
  }
  return b;
}

// Random union of boxes and balls, dims up to 64^3.
inline Bits random_blobs(std::mt19937& rng, Index3 dims, int count) {
  Bits b(dims);
  for (int n = 0; n < count; ++n) {
    Index3 lo, hi;
    for (int a = 0; a < 3; ++a) {
      std::uniform_int_distribution<std::int64_t> pos(0, dims[a] - 1);
      lo[a] = pos(rng);
      hi[a] = std::min<std::int64_t>(dims[a] - 1, lo[a] + std::uniform_int_distribution<std::int64_t>(0, dims[a] / 3)(rng));
    }
    b.box(lo, hi);
  }
  return b;
}

// Closed axis-aligned box, outward-facing triangles.
inline corotk::SurfaceMesh box_mesh(Vec3 lo, Vec3 hi) {
  corotk::SurfaceMesh m;
  for (int n = 0; n < 8; ++n) m.vertices.push_back({n & 1 ? hi.x : lo.x, n & 2 ? hi.y : lo.y, n & 4 ? hi.z : lo.z});
  const std::uint32_t quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

// Subdivided icosahedron projected onto a sphere.
inline corotk::SurfaceMesh icosphere(Vec3 center, double r, int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = corotk::normalized(p);
  std::vector<corotk::Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                     {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                     {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                     {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back(corotk::normalized(v[a] + v[b]));
      const auto id = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<corotk::Triangle> next;
    for (const auto& tri : f) {
      const auto a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  corotk::SurfaceMesh m;
  for (const auto& p : v) m.vertices.push_back(center + r * p);
  m.triangles = std::move(f);
  return m;
}

// Closed cylinder along +z from z0 to z1, `rings` cross-sections, capped by fans.
inline corotk::SurfaceMesh tube_mesh(Vec3 base, double length, double r, int sides, int rings) {
  corotk::SurfaceMesh m;
  for (int k = 0; k < rings; ++k)
    for (int s = 0; s < sides; ++s) {
      const double a = 2.0 * M_PI * s / sides;
      m.vertices.push_back(base + Vec3{r * std::cos(a), r * std::sin(a), length * k / (rings - 1)});
    }
  auto id = [&](int k, int s) { return static_cast<std::uint32_t>(k * sides + (s % sides)); };
  for (int k = 0; k + 1 < rings; ++k)
    for (int s = 0; s < sides; ++s) {
      m.triangles.push_back({id(k, s), id(k, s + 1), id(k + 1, s + 1)});
      m.triangles.push_back({id(k, s), id(k + 1, s + 1), id(k + 1, s)});
    }
  m.vertices.push_back(base);
  const auto bottom = static_cast<std::uint32_t>(m.vertices.size() - 1);
  m.vertices.push_back(base + Vec3{0, 0, length});
  const auto top = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (int s = 0; s < sides; ++s) {
    m.triangles.push_back({bottom, id(0, s + 1), id(0, s)});
    m.triangles.push_back({top, id(rings - 1, s), id(rings - 1, s + 1)});
  }
  return m;
}

// Random tree graph: root endpoint, polyline edges, branch nodes of degree 3.
inline corotk::CenterlineGraph random_tree(std::mt19937& rng, int branchings) {
  using corotk::GraphEdge;
  using corotk::GraphNode;
  using corotk::NodeKind;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> len(2.0, 9.0);
  corotk::CenterlineGraph g;
  g.nodes.push_back({{0, 0, 0}, NodeKind::root});
  auto grow = [&](std::size_t from, Vec3 dir) {
    const Vec3 start = g.nodes[from].position;
    Vec3 d = corotk::normalized(dir + 0.4 * Vec3{u(rng), u(rng), u(rng)});
    const double l = len(rng);
    const int pieces = 3;
    GraphEdge e{from, 0, {start}};
    Vec3 p = start;
    for (int s = 1; s <= pieces; ++s) {
      p = p + (l / pieces) * d;
      e.points.push_back(p);
      d = corotk::normalized(d + 0.2 * Vec3{u(rng), u(rng), u(rng)});
    }
    g.nodes.push_back({p, NodeKind::endpoint});
    e.b = g.nodes.size() - 1;
    g.edges.push_back(e);
    return e.b;
  };
  std::vector<std::pair<std::size_t, Vec3>> leaves{{grow(0, {0, 0, 1}), {0, 0, 1}}};
  for (int n = 0; n < branchings; ++n) {
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng);
    const auto [node, dir] = leaves[pick];
    leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
    g.nodes[node].kind = NodeKind::branch;
    const Vec3 side = corotk::normalized(corotk::cross(dir, Vec3{u(rng), u(rng), u(rng)} + Vec3{0.1, 0.2, 0.3}));
    const Vec3 d1 = corotk::normalized(dir + side), d2 = corotk::normalized(dir - side);
    leaves.push_back({grow(node, d1), d1});
    leaves.push_back({grow(node, d2), d2});
  }
  return g;
}

}  // namespace phantom
