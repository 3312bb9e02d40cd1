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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corotk/geometry.hpp"
#include "corotk/mesh.hpp"
#include "corotk/skeleton.hpp"

namespace corotk {

struct Bone {
  int id = 0;
  std::optional<int> parent;
  Vec3 head;  // rest pose, mm
  Vec3 tail;
  double rest_length = 0.0;

  friend bool operator==(const Bone&, const Bone&) = default;
};

// Tree of bones with a single root. Bones are kept parents-first.
class Armature {
 public:
  Armature() = default;
  // Validates the tree invariants; throws Error(root / connectivity / input).
  explicit Armature(std::vector<Bone> bones);

  const std::vector<Bone>& bones() const { return bones_; }
  std::size_t size() const { return bones_.size(); }
  bool empty() const { return bones_.empty(); }
  int root() const { return root_; }
  bool contains(int id) const { return index_.count(id) != 0; }
  // Throws Error(unknown_id).
  const Bone& bone(int id) const;
  const std::vector<int>& children(int id) const;
  // `id` and every descendant, parents first.
  std::vector<int> subtree(int id) const;

  friend bool operator==(const Armature& a, const Armature& b) { return a.bones_ == b.bones_; }

 private:
  std::vector<Bone> bones_;
  std::map<int, std::size_t> index_;
  std::map<int, std::vector<int>> children_;
  int root_ = -1;
};

struct Pose {
  Rigid global;                // whole-tree rigid placement
  std::map<int, Quat> local;   // per-bone rotation about its head; absent = identity

  Quat local_rotation(int id) const;
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct PosedBone {
  Rigid transform;  // rest -> posed
  Vec3 head;
  Vec3 tail;
};

inline constexpr double kDefaultMaxBoneLength = 3.0;

// Splits every edge into ceil(length / max_bone_length) equal-arclength bones, walking
// outward from the graph's single root node (which must be an endpoint).
Armature build_armature(const CenterlineGraph& graph, double max_bone_length_mm = kDefaultMaxBoneLength);

inline constexpr int kDefaultWeightNeighbors = 4;
inline constexpr double kWeightEpsilon = 1e-6;

// Inverse-square distance weights over the k nearest bones (ties by bone id).
SurfaceMesh compute_weights(const SurfaceMesh& mesh, const Armature& armature, int k = kDefaultWeightNeighbors);

// Throws Error(unknown_id) if the pose names a bone the armature lacks, or
// Error(input) on a non-unit rotation.
void validate_pose(const Armature& armature, const Pose& pose);

std::map<int, PosedBone> forward_kinematics(const Armature& armature, const Pose& pose);

// Rotates `bone_id` about its posed head by the world-frame rotation `delta`;
// descendants follow rigidly.
Pose pose_rotate(const Armature& armature, const Pose& pose, int bone_id, const Quat& delta);

// Applies `transform` on top of the current global placement.
Pose rigid_align(const Armature& armature, const Pose& pose, const Rigid& transform);

// v' = v + sum_i w_i (T_i(v) - v).
SurfaceMesh deform_mesh(const SurfaceMesh& mesh, const Armature& armature, const Pose& pose);

struct CutResult {
  Armature armature;
  SurfaceMesh mesh;
  Pose pose;
};

// Removes `bone_id` and its subtree together with every vertex whose dominant weight
// is on a removed bone; surviving weights are renormalized.
CutResult cut_branch(const Armature& armature, const SurfaceMesh& mesh, const Pose& pose, int bone_id);

std::string to_json(const Armature& armature, const Pose& pose);
struct ArmatureDocument {
  Armature armature;
  Pose pose;
};
ArmatureDocument armature_from_json(const std::string& text);

}  // namespace corotk
