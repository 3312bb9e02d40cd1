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

#include "corotk/skeleton.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "corotk/error.hpp"
#include "json.hpp"

namespace corotk {
namespace {

constexpr int kCenter = 13;
constexpr std::uint32_t kCube = (1u << 27) - 1;

constexpr int cube_bit(int dx, int dy, int dz) { return (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1); }

struct CubeTables {
  std::array<std::uint32_t, 27> adj26{};
  std::array<std::uint32_t, 27> adj6{};
  std::uint32_t n18 = 0;
  std::uint32_t n6 = 0;
};

CubeTables make_tables() {
  CubeTables t;
  auto coords = [](int p) { return std::array<int, 3>{p % 3 - 1, (p / 3) % 3 - 1, p / 9 - 1}; };
  for (int p = 0; p < 27; ++p) {
    if (p == kCenter) continue;
    const auto a = coords(p);
    const int manhattan = std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]);
    if (manhattan <= 2) t.n18 |= 1u << p;
    if (manhattan == 1) t.n6 |= 1u << p;
    for (int q = 0; q < 27; ++q) {
      if (q == kCenter || q == p) continue;
      const auto b = coords(q);
      const int dx = std::abs(a[0] - b[0]), dy = std::abs(a[1] - b[1]), dz = std::abs(a[2] - b[2]);
      if (std::max({dx, dy, dz}) == 1) t.adj26[p] |= 1u << q;
      if (dx + dy + dz == 1) t.adj6[p] |= 1u << q;
    }
  }
  return t;
}

const CubeTables& tables() {
  static const CubeTables t = make_tables();
  return t;
}

// Connected components of `set` under `adj`, counting only those meeting `touch`.
int count_components(std::uint32_t set, const std::array<std::uint32_t, 27>& adj, std::uint32_t touch) {
  int count = 0;
  while (set != 0) {
    const std::uint32_t seed = set & (~set + 1);
    std::uint32_t comp = seed;
    std::uint32_t frontier = seed;
    while (frontier != 0) {
      const int p = std::countr_zero(frontier);
      frontier &= frontier - 1;
      const std::uint32_t grow = adj[static_cast<std::size_t>(p)] & set & ~comp;
      comp |= grow;
      frontier |= grow;
    }
    set &= ~comp;
    if (comp & touch) ++count;
  }
  return count;
}

// Zero-padded copy of a binary buffer so every voxel has a full neighborhood.
struct Padded {
  std::int64_t nx, ny, nz;
  std::vector<std::uint8_t> bits;

  Padded(std::span<const std::uint8_t> src, const Index3& d)
      : nx(d[0] + 2), ny(d[1] + 2), nz(d[2] + 2), bits(static_cast<std::size_t>(nx * ny * nz), 0) {
    for (std::int64_t k = 0; k < d[2]; ++k)
      for (std::int64_t j = 0; j < d[1]; ++j)
        for (std::int64_t i = 0; i < d[0]; ++i)
          bits[index(i + 1, j + 1, k + 1)] = src[static_cast<std::size_t>(i + d[0] * (j + d[1] * k))];
  }

  std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>(i + nx * (j + ny * k));
  }

  std::uint32_t cube(std::size_t n) const {
    std::uint32_t c = 0;
    const auto base = static_cast<std::int64_t>(n);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (bits[static_cast<std::size_t>(base + dx + nx * (dy + ny * dz))])
            c |= 1u << cube_bit(dx, dy, dz);
    return c;
  }
};

bool deletable(std::uint32_t cube) {
  const std::uint32_t neighbors = cube & ~(1u << kCenter);
  if (std::popcount(neighbors) <= 1) return false;  // curve end or isolated voxel
  return is_simple_point(cube);
}

}  // namespace

bool is_simple_point(std::uint32_t cube) {
  const auto& t = tables();
  const std::uint32_t fg = cube & kCube & ~(1u << kCenter);
  if (count_components(fg, t.adj26, kCube) != 1) return false;
  const std::uint32_t bg = ~cube & t.n18;
  return count_components(bg, t.adj6, t.n6) == 1;
}

std::vector<std::uint8_t> skeletonize_bits(std::span<const std::uint8_t> bits, const Index3& dims) {
  Padded pad(bits, dims);
  const std::int64_t nx = pad.nx, ny = pad.ny;
  const std::array<std::int64_t, 6> directions{-nx * ny, nx * ny, -nx, nx, -1, 1};

  std::vector<std::size_t> fg;
  for (std::size_t n = 0; n < pad.bits.size(); ++n)
    if (pad.bits[n]) fg.push_back(n);

  std::vector<std::size_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const std::int64_t step : directions) {
      candidates.clear();
      for (const std::size_t n : fg) {
        if (pad.bits[static_cast<std::size_t>(static_cast<std::int64_t>(n) + step)]) continue;
        if (deletable(pad.cube(n))) candidates.push_back(n);
      }
      bool removed = false;
      for (const std::size_t n : candidates) {
        if (deletable(pad.cube(n))) {
          pad.bits[n] = 0;
          removed = true;
        }
      }
      if (removed) {
        changed = true;
        std::erase_if(fg, [&](std::size_t n) { return pad.bits[n] == 0; });
      }
    }
  }

  std::vector<std::uint8_t> out(bits.size(), 0);
  for (std::int64_t k = 0; k < dims[2]; ++k)
    for (std::int64_t j = 0; j < dims[1]; ++j)
      for (std::int64_t i = 0; i < dims[0]; ++i)
        out[static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k))] = pad.bits[pad.index(i + 1, j + 1, k + 1)];
  return out;
}

Volume skeletonize(const Volume& mask) {
  const auto bits = foreground(mask);
  return mask_from(mask.grid(), skeletonize_bits(bits, mask.dims()));
}

double GraphEdge::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += distance(points[i - 1], points[i]);
  return len;
}

std::vector<std::size_t> CenterlineGraph::degrees() const {
  std::vector<std::size_t> deg(nodes.size(), 0);
  for (const auto& e : edges) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

double CenterlineGraph::total_length() const {
  double len = 0.0;
  for (const auto& e : edges) len += e.length();
  return len;
}

CenterlineGraph extract_graph(const Volume& skeleton) {
  const auto bits = foreground(skeleton);
  const Grid& g = skeleton.grid();
  Padded pad(bits, g.dims);
  const std::int64_t nx = pad.nx, ny = pad.ny;

  std::vector<std::int64_t> offsets;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx || dy || dz) offsets.push_back(dx + nx * (dy + ny * dz));

  auto neighbors_of = [&](std::size_t n) {
    std::vector<std::size_t> out;
    for (const auto o : offsets) {
      const auto m = static_cast<std::size_t>(static_cast<std::int64_t>(n) + o);
      if (pad.bits[m]) out.push_back(m);
    }
    return out;
  };
  auto physical = [&](std::size_t n) {
    const auto s = static_cast<std::int64_t>(n);
    const Vec3 idx{static_cast<double>(s % nx - 1), static_cast<double>((s / nx) % ny - 1),
                   static_cast<double>(s / (nx * ny) - 1)};
    return g.to_physical(idx);
  };

  std::vector<std::size_t> voxels;
  std::map<std::size_t, int> degree;
  for (std::size_t n = 0; n < pad.bits.size(); ++n) {
    if (!pad.bits[n]) continue;
    const std::uint32_t c = pad.cube(n);
    if (c == kCube) throw Error(ErrorCode::thinness, "skeleton has a voxel with a full 3x3x3 neighborhood");
    voxels.push_back(n);
    degree[n] = std::popcount(c & ~(1u << kCenter));
  }

  CenterlineGraph graph;
  std::map<std::size_t, std::size_t> node_of;  // voxel -> node index

  // Branch clusters: 26-connected groups of voxels with three or more neighbors.
  for (const std::size_t n : voxels) {
    if (degree[n] < 3 || node_of.count(n)) continue;
    std::vector<std::size_t> cluster{n};
    std::set<std::size_t> seen{n};
    for (std::size_t q = 0; q < cluster.size(); ++q)
      for (const std::size_t m : neighbors_of(cluster[q]))
        if (degree[m] >= 3 && seen.insert(m).second) cluster.push_back(m);
    Vec3 centroid{};
    for (const auto v : cluster) centroid += physical(v);
    centroid = centroid / static_cast<double>(cluster.size());
    std::size_t best = cluster.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto v : cluster) {
      const double d = distance(physical(v), centroid);
      if (d < best_d || (d == best_d && v < best)) {
        best_d = d;
        best = v;
      }
    }
    const std::size_t id = graph.nodes.size();
    graph.nodes.push_back({physical(best), NodeKind::branch});
    for (const auto v : cluster) node_of[v] = id;
  }
  // Endpoints and isolated voxels, in scan order; renumber so that all nodes
  // follow scan order of their first voxel.
  for (const std::size_t n : voxels) {
    if (degree[n] >= 3 || degree[n] == 2) continue;
    node_of[n] = graph.nodes.size();
    graph.nodes.push_back({physical(n), NodeKind::endpoint});
  }

  std::set<std::size_t> visited;  // degree-2 voxels already on an edge
  std::set<std::pair<std::size_t, std::size_t>> direct;  // adjacent node-voxel pairs

  auto trace = [&](std::size_t from_voxel, std::size_t first) {
    const std::size_t a = node_of.at(from_voxel);
    GraphEdge edge{a, 0, {graph.nodes[a].position}};
    std::size_t prev = from_voxel;
    std::size_t cur = first;
    while (!node_of.count(cur)) {
      visited.insert(cur);
      edge.points.push_back(physical(cur));
      // A degree-2 voxel has exactly one way forward.
      std::size_t next = cur;
      for (const std::size_t m : neighbors_of(cur))
        if (m != prev) next = m;
      if (next == cur || visited.count(next)) return;
      prev = cur;
      cur = next;
    }
    edge.b = node_of.at(cur);
    edge.points.push_back(graph.nodes[edge.b].position);
    graph.edges.push_back(std::move(edge));
  };

  for (const std::size_t n : voxels) {
    if (!node_of.count(n)) continue;
    for (const std::size_t m : neighbors_of(n)) {
      if (node_of.count(m)) {
        if (node_of.at(m) == node_of.at(n)) continue;
        const auto key = std::minmax(n, m);
        if (!direct.insert(key).second) continue;
        const std::size_t a = node_of.at(n), b = node_of.at(m);
        graph.edges.push_back({a, b, {graph.nodes[a].position, graph.nodes[b].position}});
      } else if (!visited.count(m)) {
        trace(n, m);
      }
    }
  }

  // Closed loops without any node: anchor a node at the first voxel in scan order.
  for (const std::size_t n : voxels) {
    if (node_of.count(n) || visited.count(n)) continue;
    const std::size_t id = graph.nodes.size();
    graph.nodes.push_back({physical(n), NodeKind::branch});
    node_of[n] = id;
    const auto nb = neighbors_of(n);
    if (!nb.empty() && !visited.count(nb.front())) trace(n, nb.front());
  }

  // Collapse duplicate parallel edges between the same pair of nodes through
  // adjacent cluster voxels.
  std::set<std::pair<std::size_t, std::size_t>> seen_pairs;
  std::vector<GraphEdge> unique;
  for (auto& e : graph.edges) {
    if (e.points.size() == 2) {
      const auto key = std::minmax(e.a, e.b);
      if (!seen_pairs.insert(key).second) continue;
    }
    unique.push_back(std::move(e));
  }
  graph.edges = std::move(unique);
  return graph;
}

CenterlineGraph prune_spurs(const CenterlineGraph& input, double min_length_mm) {
  if (!(min_length_mm >= 0.0)) throw Error(ErrorCode::input, "spur length must be non-negative");
  CenterlineGraph g = input;
  std::vector<bool> alive_node(g.nodes.size(), true);
  std::vector<bool> alive_edge(g.edges.size(), true);
  bool pruned_any = false;

  auto degrees = [&] {
    std::vector<std::size_t> deg(g.nodes.size(), 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (alive_edge[e]) {
        ++deg[g.edges[e].a];
        ++deg[g.edges[e].b];
      }
    return deg;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    auto deg = degrees();
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (!alive_edge[e]) continue;
      const auto& edge = g.edges[e];
      if (edge.a == edge.b) continue;
      std::size_t leaf = edge.a, other = edge.b;
      if (deg[leaf] != 1) std::swap(leaf, other);
      if (deg[leaf] != 1 || deg[other] < 3) continue;
      if (g.nodes[leaf].kind == NodeKind::root) continue;
      if (!(edge.length() < min_length_mm)) continue;
      alive_edge[e] = false;
      alive_node[leaf] = false;
      --deg[leaf];
      --deg[other];
      changed = pruned_any = true;
    }
    if (!pruned_any) break;
    // Merge chains through degree-2 nodes.
    deg = degrees();
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
      if (!alive_node[n] || deg[n] != 2 || g.nodes[n].kind == NodeKind::root) continue;
      std::vector<std::size_t> inc;
      for (std::size_t e = 0; e < g.edges.size(); ++e)
        if (alive_edge[e] && (g.edges[e].a == n || g.edges[e].b == n)) inc.push_back(e);
      if (inc.size() != 2) continue;  // self loop
      GraphEdge first = g.edges[inc[0]];
      GraphEdge second = g.edges[inc[1]];
      if (first.b != n) {
        std::reverse(first.points.begin(), first.points.end());
        std::swap(first.a, first.b);
      }
      if (second.a != n) {
        std::reverse(second.points.begin(), second.points.end());
        std::swap(second.a, second.b);
      }
      GraphEdge merged{first.a, second.b, first.points};
      merged.points.insert(merged.points.end(), second.points.begin() + 1, second.points.end());
      g.edges[inc[0]] = std::move(merged);
      alive_edge[inc[1]] = false;
      alive_node[n] = false;
      changed = true;
      deg = degrees();
    }
  }

  CenterlineGraph out;
  std::vector<std::size_t> remap(g.nodes.size(), 0);
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    if (!alive_node[n]) continue;
    remap[n] = out.nodes.size();
    out.nodes.push_back(g.nodes[n]);
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!alive_edge[e]) continue;
    GraphEdge edge = g.edges[e];
    edge.a = remap[edge.a];
    edge.b = remap[edge.b];
    out.edges.push_back(std::move(edge));
  }
  if (pruned_any) {
    const auto deg = out.degrees();
    for (std::size_t n = 0; n < out.nodes.size(); ++n)
      if (out.nodes[n].kind != NodeKind::root) out.nodes[n].kind = deg[n] >= 3 ? NodeKind::branch : NodeKind::endpoint;
  }
  return out;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::endpoint: return "endpoint";
    case NodeKind::branch: return "branch";
    case NodeKind::root: return "root";
  }
  return "endpoint";
}

namespace {

nlohmann::json point_json(Vec3 p) { return nlohmann::json::array({p.x, p.y, p.z}); }

Vec3 json_point(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::format, "point must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string to_json(const CenterlineGraph& graph) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : graph.nodes)
    j["nodes"].push_back({{"pos", point_json(n.position)}, {"kind", std::string(to_string(n.kind))}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : graph.edges) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : e.points) pts.push_back(point_json(p));
    j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"points", std::move(pts)}});
  }
  return j.dump();
}

CenterlineGraph graph_from_json(const std::string& text) {
  CenterlineGraph g;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& n : j.at("nodes")) {
      const std::string kind = n.value("kind", "endpoint");
      NodeKind k = NodeKind::endpoint;
      if (kind == "branch") k = NodeKind::branch;
      else if (kind == "root") k = NodeKind::root;
      else if (kind != "endpoint") throw Error(ErrorCode::format, "unknown node kind " + kind);
      g.nodes.push_back({json_point(n.at("pos")), k});
    }
    for (const auto& e : j.at("edges")) {
      GraphEdge edge{e.at("a").get<std::size_t>(), e.at("b").get<std::size_t>(), {}};
      if (edge.a >= g.nodes.size() || edge.b >= g.nodes.size())
        throw Error(ErrorCode::format, "edge references a missing node");
      for (const auto& p : e.at("points")) edge.points.push_back(json_point(p));
      if (edge.points.size() < 2) throw Error(ErrorCode::format, "edge needs at least two points");
      g.edges.push_back(std::move(edge));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::format, std::string("graph JSON: ") + ex.what());
  }
  return g;
}

}  // namespace corotk
