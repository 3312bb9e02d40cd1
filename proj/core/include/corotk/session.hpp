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
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "corotk/armature.hpp"
#include "corotk/mesh.hpp"
#include "corotk/volume.hpp"
#include "corotk/window.hpp"

namespace corotk {

struct RotateEdit {
  int bone = 0;
  Quat rotation;  // world frame, about the bone's posed head
};
struct RigidEdit {
  Rigid transform;  // applied on top of the current global placement
};
struct CutEdit {
  int bone = 0;
};
// Freeform correction: the deformed vertex moves by `delta` mm.
struct NudgeEdit {
  std::uint32_t vertex = 0;
  Vec3 delta;
};
// Replaces the pose wholesale (loading a saved pose).
struct SetPoseEdit {
  Pose pose;
};

using Edit = std::variant<RotateEdit, RigidEdit, CutEdit, NudgeEdit, SetPoseEdit>;

struct LoggedEdit {
  Edit edit;
  std::string time;  // ISO 8601 UTC, informational only
};

// Accepts {"type": "rotate", "bone", "q": [w,x,y,z]} or "axis" + "angle_deg";
// {"type": "rigid", "q", "t"}; {"type": "cut", "bone"};
// {"type": "vertex_nudge", "vertex", "delta"}; {"type": "set_pose", "pose": {global, local}}.
Edit edit_from_json(const std::string& text);
std::string to_json(const LoggedEdit& edit);

struct RegistrationState {
  Armature armature;
  Pose pose;
  SurfaceMesh rest;      // weighted, in the rest pose
  SurfaceMesh deformed;  // rest deformed by pose

  friend bool operator==(const RegistrationState&, const RegistrationState&) = default;
};

// Applies one edit to a state. Throws the armature module's errors.
RegistrationState apply_edit(const RegistrationState& state, const Edit& edit);

struct SliceView {
  GrayImage image;
  ContourSet contours;  // grid-local mm (x along i, y along j)
  std::string warning;  // set when contours could not be closed
};

struct SaveReport {
  std::filesystem::path mesh;
  std::filesystem::path mask;
  std::filesystem::path pose;
  std::filesystem::path log;
  std::optional<std::string> voxelization_error;
};

struct SessionOptions {
  double max_bone_length_mm = kDefaultMaxBoneLength;
  int weight_neighbors = kDefaultWeightNeighbors;
};

// One manual registration case: CT scan, vessel mesh, armature, and an append-only
// edit log. The current state is always the replay of log[0, cursor).
class Session {
 public:
  // Reads scan.nii.gz (or scan.nii), tree.obj and, if present, armature.json and
  // ostium.json. Without armature.json the armature is built from the mesh's
  // skeleton. Throws Error(missing_case) when required files are absent.
  static Session open(const std::filesystem::path& case_dir, const SessionOptions& options = {});

  const std::string& case_id() const { return case_id_; }
  const std::filesystem::path& case_dir() const { return case_dir_; }
  const Volume& volume() const { return volume_; }
  const RegistrationState& initial() const { return initial_; }
  const RegistrationState& state() const { return state_; }
  const std::vector<LoggedEdit>& log() const { return log_; }
  std::size_t cursor() const { return cursor_; }

  // Discards edits past the cursor, applies and logs `edit`.
  void apply(const Edit& edit);
  bool undo();
  bool redo();

  SliceView get_slice(std::int64_t k, const WindowSpec& window) const;
  ContourSet contours(std::int64_t k) const;

  // Writes tree_aligned.obj, gt_mask.nii.gz, pose.json and edits.jsonl.
  SaveReport save_gt(const std::filesystem::path& out_dir) const;
  // Edit log up to the cursor, one JSON object per line.
  std::string log_jsonl() const;
  // Applies every edit of a JSONL log in order.
  void replay_jsonl(const std::string& jsonl);

 private:
  Session() = default;
  void rebuild();

  std::string case_id_;
  std::filesystem::path case_dir_;
  Volume volume_;
  RegistrationState initial_;
  RegistrationState state_;
  std::vector<LoggedEdit> log_;
  std::size_t cursor_ = 0;
};

// Mesh -> voxelize -> skeletonize -> graph -> armature. The root is the endpoint
// nearest `ostium` when given, otherwise the endpoint farthest from the mesh surface.
Armature armature_from_mesh(const SurfaceMesh& mesh, double voxel_mm, std::optional<Vec3> ostium,
                            double max_bone_length_mm = kDefaultMaxBoneLength);

}  // namespace corotk
