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
#include <span>
#include <string>
#include <vector>

#include "corotk/geometry.hpp"
#include "corotk/volume.hpp"

namespace corotk {

// Topology-preserving curve thinning. Six directional sub-iterations delete simple,
// non-endpoint border voxels; candidates are gathered from the mask as it stands at
// the start of the sub-iteration and re-checked one by one in scan order.
Volume skeletonize(const Volume& mask);
std::vector<std::uint8_t> skeletonize_bits(std::span<const std::uint8_t> bits, const Index3& dims);

// True iff deleting the center of a 3x3x3 neighborhood preserves topology.
// `cube` holds 27 bits, bit (dx+1) + 3(dy+1) + 9(dz+1); the center bit is ignored.
bool is_simple_point(std::uint32_t cube);

enum class NodeKind { endpoint, branch, root };

struct GraphNode {
  Vec3 position;
  NodeKind kind = NodeKind::endpoint;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<Vec3> points;  // starts at nodes[a].position, ends at nodes[b].position

  double length() const;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct CenterlineGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  std::vector<std::size_t> degrees() const;
  double total_length() const;

  friend bool operator==(const CenterlineGraph&, const CenterlineGraph&) = default;
};

// Nodes at skeleton voxels with one neighbor (endpoints), three or more (branch
// voxels, 26-adjacent ones merged into a single node) and isolated voxels.
// Throws Error(thinness) when some voxel has a completely filled 3x3x3 neighborhood.
CenterlineGraph extract_graph(const Volume& skeleton);

// Removes leaf edges shorter than `min_length_mm` until none remain, then merges
// chains through degree-2 nodes. Root nodes are never removed or merged.
CenterlineGraph prune_spurs(const CenterlineGraph& graph, double min_length_mm);

std::string to_json(const CenterlineGraph& graph);
CenterlineGraph graph_from_json(const std::string& text);

std::string_view to_string(NodeKind kind);

}  // namespace corotk
