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

#include "corotk/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "corotk/error.hpp"

namespace corotk {
namespace {

using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;

EdgeKey undirected(std::uint32_t a, std::uint32_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::map<EdgeKey, int> edge_use(const SurfaceMesh& mesh) {
  std::map<EdgeKey, int> use;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++use[undirected(t[e], t[(e + 1) % 3])];
  return use;
}

double triangle_area(Vec3 a, Vec3 b, Vec3 c) { return 0.5 * norm(cross(b - a, c - a)); }

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void drop_degenerate(SurfaceMesh& mesh, std::vector<std::string>& warnings) {
  const std::size_t before = mesh.triangles.size();
  std::erase_if(mesh.triangles, [&](const Triangle& t) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return true;
    return triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) == 0.0;
  });
  if (mesh.triangles.size() != before)
    warnings.push_back("dropped " + std::to_string(before - mesh.triangles.size()) + " zero-area triangles");
}

SurfaceMesh parse_obj(std::istream& in) {
  SurfaceMesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw Error(ErrorCode::format, "bad vertex on line " + std::to_string(line_no));
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::uint32_t> face;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long idx = 0;
        auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0)
          throw Error(ErrorCode::format, "bad face index '" + tok + "' on line " + std::to_string(line_no));
        const long n = static_cast<long>(mesh.vertices.size());
        const long zero_based = idx > 0 ? idx - 1 : n + idx;
        if (zero_based < 0 || zero_based >= n)
          throw Error(ErrorCode::format, "face index " + std::to_string(idx) + " out of range on line " +
                                             std::to_string(line_no));
        face.push_back(static_cast<std::uint32_t>(zero_based));
      }
      if (face.size() < 3) throw Error(ErrorCode::format, "face with fewer than 3 vertices on line " + std::to_string(line_no));
      for (std::size_t k = 1; k + 1 < face.size(); ++k) mesh.triangles.push_back({face[0], face[k], face[k + 1]});
    }
  }
  return mesh;
}

struct VertexWelder {
  std::map<std::array<long long, 3>, std::uint32_t> index;
  SurfaceMesh* mesh;

  std::uint32_t add(Vec3 p) {
    const std::array<long long, 3> key{std::llround(p.x * 1e6), std::llround(p.y * 1e6), std::llround(p.z * 1e6)};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(mesh->vertices.size());
    mesh->vertices.push_back(p);
    index.emplace(key, id);
    return id;
  }
};

SurfaceMesh parse_stl(const std::string& bytes) {
  SurfaceMesh mesh;
  VertexWelder weld{{}, &mesh};
  const bool ascii = bytes.compare(0, 5, "solid") == 0 && bytes.find("facet") != std::string::npos;
  if (ascii) {
    std::istringstream in(bytes);
    std::string tok;
    std::vector<std::uint32_t> corner;
    while (in >> tok) {
      if (tok == "vertex") {
        Vec3 p;
        if (!(in >> p.x >> p.y >> p.z)) throw Error(ErrorCode::format, "bad STL vertex");
        corner.push_back(weld.add(p));
      } else if (tok == "endfacet") {
        if (corner.size() != 3) throw Error(ErrorCode::format, "STL facet without 3 vertices");
        mesh.triangles.push_back({corner[0], corner[1], corner[2]});
        corner.clear();
      }
    }
    return mesh;
  }
  if (bytes.size() < 84) throw Error(ErrorCode::format, "binary STL shorter than its header");
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  if (bytes.size() < 84 + static_cast<std::size_t>(count) * 50)
    throw Error(ErrorCode::truncated, "binary STL has fewer facets than declared");
  for (std::uint32_t f = 0; f < count; ++f) {
    const char* rec = bytes.data() + 84 + static_cast<std::size_t>(f) * 50;
    Triangle t{};
    for (int v = 0; v < 3; ++v) {
      float xyz[3];
      std::memcpy(xyz, rec + 12 + v * 12, 12);
      t[v] = weld.add({xyz[0], xyz[1], xyz[2]});
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

TopologyReport check_topology(const SurfaceMesh& mesh) {
  TopologyReport r;
  for (const auto& [edge, count] : edge_use(mesh)) {
    if (count == 1) ++r.boundary_edges;
    else if (count > 2) ++r.nonmanifold_edges;
  }
  return r;
}

void require_watertight(const SurfaceMesh& mesh) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::open_loop, "mesh has no triangles");
  const auto r = check_topology(mesh);
  if (!r.watertight())
    throw Error(ErrorCode::open_loop, "mesh is not watertight: " + std::to_string(r.boundary_edges) +
                                          " boundary edges, " + std::to_string(r.nonmanifold_edges) +
                                          " non-manifold edges");
}

MeshLoadResult load_mesh_checked(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  MeshLoadResult result;
  const std::string ext = lower_extension(path);
  if (ext == ".obj") {
    result.mesh = parse_obj(in);
  } else if (ext == ".stl") {
    std::ostringstream ss;
    ss << in.rdbuf();
    result.mesh = parse_stl(ss.str());
  } else {
    throw Error(ErrorCode::unsupported, "mesh format " + ext);
  }
  drop_degenerate(result.mesh, result.warnings);
  if (result.mesh.triangles.empty()) {
    result.warnings.push_back("mesh is empty");
    return result;
  }
  const auto topo = check_topology(result.mesh);
  if (topo.boundary_edges) result.warnings.push_back(std::to_string(topo.boundary_edges) + " boundary edges");
  if (topo.nonmanifold_edges) result.warnings.push_back(std::to_string(topo.nonmanifold_edges) + " non-manifold edges");
  result.watertight = topo.watertight();
  return result;
}

SurfaceMesh load_mesh(const std::filesystem::path& path) { return load_mesh_checked(path).mesh; }

std::string to_obj(const SurfaceMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.triangles.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v ";
    out += format_double(v.x);
    out += ' ';
    out += format_double(v.y);
    out += ' ';
    out += format_double(v.z);
    out += '\n';
  }
  for (const auto& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) + '\n';
  }
  return out;
}

void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  const std::string text = to_obj(mesh);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

ContourSet slice_contours(const SurfaceMesh& mesh, double z_mm) {
  ContourSet out;
  out.z_mm = z_mm;

  struct Segment {
    EdgeKey from, to;
    Vec2 p, q;
  };
  std::vector<Segment> segments;
  std::map<EdgeKey, Vec2> crossing;
  auto above = [&](std::uint32_t v) { return mesh.vertices[v].z >= z_mm; };
  auto cross_point = [&](std::uint32_t a, std::uint32_t b) {
    const EdgeKey key = undirected(a, b);
    auto it = crossing.find(key);
    if (it != crossing.end()) return it->second;
    // Always interpolate from the lower index so shared edges agree bitwise.
    const Vec3 pa = mesh.vertices[key.first], pb = mesh.vertices[key.second];
    const double t = (z_mm - pa.z) / (pb.z - pa.z);
    const Vec2 p{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
    crossing.emplace(key, p);
    return p;
  };

  for (const auto& tri : mesh.triangles) {
    // The vertex alone on its side fixes the direction from the winding alone, so
    // zero-length crossings (plane through a vertex) stay consistently oriented.
    int lone = -1;
    for (int e = 0; e < 3; ++e)
      if (above(tri[e]) != above(tri[(e + 1) % 3]) && above(tri[e]) != above(tri[(e + 2) % 3])) lone = e;
    if (lone < 0) continue;
    const std::uint32_t a = tri[lone], next = tri[(lone + 1) % 3], prev = tri[(lone + 2) % 3];
    // Lone vertex below: travel from edge (prev, a) to edge (a, next); outward normal ends up on the right.
    EdgeKey from = undirected(prev, a), to = undirected(a, next);
    Vec2 p = cross_point(prev, a), q = cross_point(a, next);
    if (above(a)) {
      std::swap(from, to);
      std::swap(p, q);
    }
    segments.push_back({from, to, p, q});
  }
  if (segments.empty()) return out;

  std::map<EdgeKey, std::vector<std::size_t>> at;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    at[segments[s].from].push_back(s);
    at[segments[s].to].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<std::vector<Vec2>> open;
  for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = true;
    std::vector<Vec2> loop{segments[s0].p, segments[s0].q};
    const EdgeKey start = segments[s0].from;
    EdgeKey cur = segments[s0].to;
    bool closed = false;
    while (true) {
      if (cur == start) {
        closed = true;
        break;
      }
      std::size_t next = segments.size();
      for (const std::size_t s : at[cur])
        if (!used[s]) {
          next = s;
          break;
        }
      if (next == segments.size()) break;
      used[next] = true;
      const Segment& seg = segments[next];
      if (seg.from == cur) {
        loop.push_back(seg.q);
        cur = seg.to;
      } else {
        loop.push_back(seg.p);
        cur = seg.from;
      }
    }
    if (closed) {
      loop.back() = loop.front();
      out.polygons.push_back(std::move(loop));
    } else {
      open.push_back(std::move(loop));
    }
  }
  if (!open.empty()) {
    std::ostringstream msg;
    msg << open.size() << " unclosed chain(s) at z=" << z_mm << ":";
    for (const auto& chain : open)
      msg << " [" << chain.size() << " pts from (" << chain.front().x << ", " << chain.front().y << ") to ("
          << chain.back().x << ", " << chain.back().y << ")]";
    throw Error(ErrorCode::open_loop, msg.str());
  }
  return out;
}

double signed_area(const std::vector<Vec2>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) a += loop[i].x * loop[i + 1].y - loop[i + 1].x * loop[i].y;
  return 0.5 * a;
}

double total_signed_area(const ContourSet& contours) {
  double a = 0.0;
  for (const auto& p : contours.polygons) a += signed_area(p);
  return a;
}

namespace {

struct ColumnHits {
  std::vector<double> z;
  bool degenerate = false;
};

// Ray at (px, py) along +k against a triangle in index space.
// Returns 0 miss, 1 hit (z written), 2 degenerate.
int cast(const std::array<Vec3, 3>& t, double px, double py, double& z) {
  const double e0 = (t[1].x - t[0].x) * (py - t[0].y) - (t[1].y - t[0].y) * (px - t[0].x);
  const double e1 = (t[2].x - t[1].x) * (py - t[1].y) - (t[2].y - t[1].y) * (px - t[1].x);
  const double e2 = (t[0].x - t[2].x) * (py - t[2].y) - (t[0].y - t[2].y) * (px - t[2].x);
  const double area = e0 + e1 + e2;
  const double scale = std::abs(area);
  if (scale < 1e-14) {
    // Vertical triangle: only a problem if the ray touches it.
    const bool touches = (std::min({e0, e1, e2}) <= 0.0 && std::max({e0, e1, e2}) >= 0.0) &&
                         px >= std::min({t[0].x, t[1].x, t[2].x}) - 1e-12 &&
                         px <= std::max({t[0].x, t[1].x, t[2].x}) + 1e-12 &&
                         py >= std::min({t[0].y, t[1].y, t[2].y}) - 1e-12 &&
                         py <= std::max({t[0].y, t[1].y, t[2].y}) + 1e-12;
    return touches && std::abs(e0) + std::abs(e1) + std::abs(e2) < 1e-12 ? 2 : 0;
  }
  const double eps = 1e-12 * std::max(1.0, scale);
  const double s0 = area > 0 ? e0 : -e0, s1 = area > 0 ? e1 : -e1, s2 = area > 0 ? e2 : -e2;
  if (s0 < -eps || s1 < -eps || s2 < -eps) return 0;
  if (s0 <= eps || s1 <= eps || s2 <= eps) return 2;
  // Barycentric weights: e1 pairs with vertex 0, e2 with vertex 1, e0 with vertex 2.
  z = (e1 * t[0].z + e2 * t[1].z + e0 * t[2].z) / area;
  return 1;
}

}  // namespace

Volume voxelize(const SurfaceMesh& mesh, const Grid& grid) {
  grid.validate();
  require_watertight(mesh);
  const std::int64_t nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];

  std::vector<std::array<Vec3, 3>> tris;
  tris.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles)
    tris.push_back({grid.to_index(mesh.vertices[t[0]]), grid.to_index(mesh.vertices[t[1]]),
                    grid.to_index(mesh.vertices[t[2]])});

  std::vector<ColumnHits> columns(static_cast<std::size_t>(nx * ny));

  auto run_band = [&](std::int64_t j_lo, std::int64_t j_hi) {
    for (const auto& t : tris) {
      const double xmin = std::min({t[0].x, t[1].x, t[2].x}), xmax = std::max({t[0].x, t[1].x, t[2].x});
      const double ymin = std::min({t[0].y, t[1].y, t[2].y}), ymax = std::max({t[0].y, t[1].y, t[2].y});
      const auto i0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(xmin - 1e-9)));
      const auto i1 = std::min<std::int64_t>(nx - 1, static_cast<std::int64_t>(std::floor(xmax + 1e-9)));
      const auto j0 = std::max<std::int64_t>(j_lo, static_cast<std::int64_t>(std::ceil(ymin - 1e-9)));
      const auto j1 = std::min<std::int64_t>(j_hi - 1, static_cast<std::int64_t>(std::floor(ymax + 1e-9)));
      for (std::int64_t j = j0; j <= j1; ++j)
        for (std::int64_t i = i0; i <= i1; ++i) {
          auto& col = columns[static_cast<std::size_t>(i + nx * j)];
          if (col.degenerate) continue;
          double z = 0.0;
          const int r = cast(t, static_cast<double>(i), static_cast<double>(j), z);
          if (r == 1) col.z.push_back(z);
          else if (r == 2) col.degenerate = true;
        }
    }
    // Re-cast degenerate or odd columns from perturbed origins.
    for (std::int64_t j = j_lo; j < j_hi; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        auto& col = columns[static_cast<std::size_t>(i + nx * j)];
        if (!col.degenerate && col.z.size() % 2 == 0) continue;
        for (int attempt = 1; attempt <= 16; ++attempt) {
          const double px = static_cast<double>(i) + attempt * 3.1e-7;
          const double py = static_cast<double>(j) + attempt * 4.7e-7;
          std::vector<double> hits;
          bool bad = false;
          for (const auto& t : tris) {
            if (px < std::min({t[0].x, t[1].x, t[2].x}) - 1e-9 || px > std::max({t[0].x, t[1].x, t[2].x}) + 1e-9 ||
                py < std::min({t[0].y, t[1].y, t[2].y}) - 1e-9 || py > std::max({t[0].y, t[1].y, t[2].y}) + 1e-9)
              continue;
            double z = 0.0;
            const int r = cast(t, px, py, z);
            if (r == 1) hits.push_back(z);
            else if (r == 2) {
              bad = true;
              break;
            }
          }
          if (!bad && hits.size() % 2 == 0) {
            col.z = std::move(hits);
            col.degenerate = false;
            break;
          }
        }
        if (col.degenerate || col.z.size() % 2 != 0)
          throw Error(ErrorCode::open_loop, "ray parity undefined at column (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ")");
      }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto bands = static_cast<std::int64_t>(std::min<unsigned>(hw, static_cast<unsigned>(ny)));
  if (bands <= 1) {
    run_band(0, ny);
  } else {
    std::vector<std::jthread> workers;
    for (std::int64_t b = 0; b < bands; ++b) workers.emplace_back(run_band, ny * b / bands, ny * (b + 1) / bands);
  }

  std::vector<std::uint8_t> bits(grid.voxel_count(), 0);
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      auto& hits = columns[static_cast<std::size_t>(i + nx * j)].z;
      if (hits.empty()) continue;
      std::sort(hits.begin(), hits.end());
      std::size_t below = 0;
      for (std::int64_t k = 0; k < nz; ++k) {
        const auto kz = static_cast<double>(k);
        while (below < hits.size() && hits[below] < kz) ++below;
        if (below % 2 == 1) bits[grid.linear(i, j, k)] = 1;
      }
    }
  return mask_from(grid, bits);
}

double mesh_volume(const SurfaceMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles)
    v += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
  return v / 6.0;
}

SurfaceMesh transformed(const SurfaceMesh& mesh, const Rigid& t) {
  SurfaceMesh out = mesh;
  if (t.is_identity()) return out;
  const Mat3 r = t.rotation.to_matrix();
  for (auto& v : out.vertices) v = r * v + t.translation;
  return out;
}

SurfaceMesh cap_holes(const SurfaceMesh& mesh) {
  SurfaceMesh out = mesh;
  // Directed boundary edges: (a -> b) appears in a triangle, (b -> a) in none.
  std::map<EdgeKey, int> directed;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++directed[{t[e], t[(e + 1) % 3]}];
  std::map<std::uint32_t, std::uint32_t> next;  // boundary successor, reversed for the cap
  for (const auto& [edge, count] : directed)
    if (!directed.count({edge.second, edge.first})) next[edge.second] = edge.first;

  std::map<std::uint32_t, bool> done;
  for (const auto& [first, unused] : next) {
    if (done[first]) continue;
    std::vector<std::uint32_t> loop;
    std::uint32_t v = first;
    while (!done[v]) {
      done[v] = true;
      loop.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) break;
      v = it->second;
    }
    if (loop.size() < 3 || v != first) continue;
    Vec3 c{};
    for (auto id : loop) c += mesh.vertices[id];
    c = c / static_cast<double>(loop.size());
    const auto cid = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.push_back(c);
    if (mesh.has_weights()) {
      std::map<int, double> acc;
      for (auto id : loop)
        for (const auto& w : mesh.weights[id]) acc[w.bone] += w.weight;
      double sum = 0.0;
      for (const auto& [b, w] : acc) sum += w;
      std::vector<BoneWeight> ws;
      for (const auto& [b, w] : acc) ws.push_back({b, w / sum});
      out.weights.push_back(std::move(ws));
    }
    for (std::size_t k = 0; k < loop.size(); ++k)
      out.triangles.push_back({loop[k], loop[(k + 1) % loop.size()], cid});
  }
  return out;
}

}  // namespace corotk
