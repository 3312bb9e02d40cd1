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

#include <numbers>
#include <random>

#include "corotk/metrics.hpp"
#include "corotk/nifti.hpp"
#include "corotk/session.hpp"
#include "synthetic_case.hpp"
#include "testing.hpp"

using namespace corotk;
using testing_support::TempDir;

namespace {

Session open_case(const TempDir& dir, const synthetic::CaseSpec& spec = {}) {
  synthetic::write_case(dir / "case1", spec);
  return Session::open(dir / "case1");
}

// Bone whose subtree starts farthest along the tube.
int distal_bone(const Armature& a) {
  int best = a.root();
  for (const auto& b : a.bones())
    if (b.head.z > a.bone(best).head.z) best = b.id;
  return best;
}

Quat quarter_about_x() { return Quat::from_axis_angle({1, 0, 0}, std::numbers::pi / 8); }

}  // namespace

TEST(Session, OpensWithIdentityPose) {
  TempDir dir;
  const Session s = open_case(dir);
  EXPECT_EQ(s.case_id(), "case1");
  EXPECT_EQ(s.state().pose, Pose{});
  EXPECT_EQ(s.cursor(), 0u);
  EXPECT_TRUE(s.log().empty());
  EXPECT_GE(s.state().armature.size(), 4u);
  EXPECT_EQ(s.state().deformed.vertices, s.state().rest.vertices);
  // The ostium pins the root at the low-z end.
  EXPECT_LT(s.state().armature.bone(s.state().armature.root()).head.z, 5.0);
}

TEST(Session, MissingFilesAreCaseErrors) {
  TempDir dir;
  synthetic::write_case(dir / "c");
  std::filesystem::remove(dir / "c" / "tree.obj");
  EXPECT_COROTK_ERROR(Session::open(dir / "c"), ErrorCode::missing_case);
  EXPECT_COROTK_ERROR(Session::open(dir / "nothing"), ErrorCode::missing_case);
}

TEST(Session, ProvidedArmatureUsedVerbatim) {
  TempDir dir;
  synthetic::write_case(dir / "c");
  const std::vector<Bone> bones = {{0, std::nullopt, {6, 6, 2}, {6, 6, 11}, 9.0}, {1, 0, {6, 6, 11}, {6, 6, 20}, 9.0}};
  const Armature mine(bones);
  testing_support::spit(dir / "c" / "armature.json", to_json(mine, Pose{}));
  const Session s = Session::open(dir / "c");
  EXPECT_EQ(s.state().armature, mine);
}

TEST(Session, RotateThenUndoIsBitExact) {
  TempDir dir;
  Session s = open_case(dir);
  const RegistrationState before = s.state();
  s.apply(RotateEdit{distal_bone(s.state().armature), quarter_about_x()});
  EXPECT_NE(s.state().deformed, before.deformed);
  EXPECT_TRUE(s.undo());
  EXPECT_EQ(s.state(), before);
  EXPECT_FALSE(s.undo());
  EXPECT_TRUE(s.redo());
  EXPECT_EQ(s.cursor(), 1u);
  EXPECT_FALSE(s.redo());
}

TEST(Session, NewEditDiscardsRedoTail) {
  TempDir dir;
  Session s = open_case(dir);
  s.apply(RigidEdit{Rigid{Quat{}, {1, 0, 0}}});
  s.apply(RigidEdit{Rigid{Quat{}, {0, 1, 0}}});
  s.undo();
  s.apply(RigidEdit{Rigid{Quat{}, {0, 0, 1}}});
  EXPECT_EQ(s.log().size(), 2u);
  EXPECT_EQ(s.state().pose.global.translation, (Vec3{1, 0, 1}));
}

TEST(Session, CutThenRotateSameBoneFails) {
  TempDir dir;
  Session s = open_case(dir);
  const int bone = distal_bone(s.state().armature);
  s.apply(CutEdit{bone});
  EXPECT_LT(s.state().rest.vertices.size(), s.initial().rest.vertices.size());
  EXPECT_COROTK_ERROR(s.apply(RotateEdit{bone, quarter_about_x()}), ErrorCode::unknown_id);
  EXPECT_EQ(s.log().size(), 1u);
  EXPECT_COROTK_ERROR(s.apply(CutEdit{s.state().armature.root()}), ErrorCode::root);
}

TEST(Session, NudgeMovesDeformedVertexByDelta) {
  TempDir dir;
  Session s = open_case(dir);
  s.apply(RotateEdit{s.state().armature.root(), Quat::from_axis_angle({0, 1, 0}, 0.3)});
  const Vec3 before = s.state().deformed.vertices[5];
  s.apply(NudgeEdit{5, {0.2, -0.1, 0.05}});
  const Vec3 after = s.state().deformed.vertices[5];
  EXPECT_NEAR(after.x - before.x, 0.2, 1e-9);
  EXPECT_NEAR(after.y - before.y, -0.1, 1e-9);
  EXPECT_NEAR(after.z - before.z, 0.05, 1e-9);
  EXPECT_COROTK_ERROR(s.apply(NudgeEdit{1000000, {1, 0, 0}}), ErrorCode::unknown_id);
}

TEST(Session, ReplayOfRandomEditsIsBitExact) {
  TempDir dir;
  Session s = open_case(dir);
  std::mt19937 rng(42);
  std::normal_distribution<double> n;
  for (int i = 0; i < 40; ++i) {
    const auto& arm = s.state().armature;
    const auto pick = std::uniform_int_distribution<std::size_t>(0, arm.size() - 1)(rng);
    const int bone = arm.bones()[pick].id;
    switch (i % 4) {
      case 0:
      case 1:
        s.apply(RotateEdit{bone, Quat::from_axis_angle({n(rng), n(rng), n(rng)}, 0.1 * n(rng))});
        break;
      case 2:
        s.apply(RigidEdit{Rigid{Quat::from_axis_angle({n(rng), n(rng), 1}, 0.05), {0.1 * n(rng), 0.1 * n(rng), 0}}});
        break;
      default:
        s.apply(NudgeEdit{static_cast<std::uint32_t>(i * 7 % s.state().rest.vertices.size()), {0.01, 0.02, -0.01}});
    }
  }
  Session fresh = Session::open(s.case_dir());
  fresh.replay_jsonl(s.log_jsonl());
  EXPECT_EQ(fresh.state().deformed, s.state().deformed);
  EXPECT_EQ(fresh.state().pose, s.state().pose);
}

TEST(Session, SliceIsWindowedAndReadOnly) {
  TempDir dir;
  Session s = open_case(dir, {.hu = 40.0f});
  const RegistrationState before = s.state();
  const SliceView v = s.get_slice(10, kNonContrastWindow);
  EXPECT_EQ(v.image.width, 24);
  EXPECT_EQ(v.image.height, 24);
  for (auto p : v.image.pixels) EXPECT_EQ(p, window_value(40.0, kNonContrastWindow));
  EXPECT_EQ(s.state(), before);
  EXPECT_COROTK_ERROR(s.get_slice(48, kNonContrastWindow), ErrorCode::range);
  EXPECT_COROTK_ERROR(s.get_slice(-1, kNonContrastWindow), ErrorCode::range);
}

TEST(Session, ContoursFollowTheMesh) {
  TempDir dir;
  Session s = open_case(dir);
  const ContourSet mid = s.get_slice(20, kNonContrastWindow).contours;  // z = 10 mm, inside the tube
  ASSERT_EQ(mid.polygons.size(), 1u);
  EXPECT_NEAR(total_signed_area(mid), std::numbers::pi * 1.5 * 1.5, 0.2);
  EXPECT_TRUE(s.get_slice(46, kNonContrastWindow).contours.polygons.empty());  // z = 23 mm, above
}

TEST(Session, DistalRotationLeavesProximalSlices) {
  TempDir dir;
  Session s = open_case(dir);
  const int bone = distal_bone(s.state().armature);
  const double head_z = s.state().armature.bone(bone).head.z;
  const auto k_near = static_cast<std::int64_t>(std::floor((head_z + 1.0) / 0.5));
  const ContourSet proximal = s.contours(6);  // z = 3 mm
  const ContourSet affected = s.contours(k_near);
  s.apply(RotateEdit{bone, Quat::from_axis_angle({1, 0, 0}, 0.5)});
  EXPECT_EQ(s.contours(6), proximal);
  EXPECT_NE(s.contours(k_near), affected);
  s.undo();
  EXPECT_EQ(s.contours(k_near), affected);
}

TEST(Session, CutOpensTubeButSlicesStillClose) {
  TempDir dir;
  Session s = open_case(dir);
  const int bone = distal_bone(s.state().armature);
  const double head_z = s.state().armature.bone(bone).head.z;
  const auto k_above = static_cast<std::int64_t>(std::ceil((head_z + 1.0) / 0.5));
  const auto before = s.contours(k_above).polygons.size();
  s.apply(CutEdit{bone});
  const SliceView v = s.get_slice(k_above, kNonContrastWindow);
  EXPECT_TRUE(v.warning.empty()) << v.warning;
  EXPECT_LE(v.contours.polygons.size(), before);
}

TEST(Session, SaveWritesArtifactsAndIsIdempotent) {
  TempDir dir;
  Session s = open_case(dir);
  const SaveReport r = s.save_gt(dir / "out");
  ASSERT_FALSE(r.voxelization_error);
  for (const auto& p : {r.mesh, r.mask, r.pose, r.log}) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  const Volume mask = read_volume(r.mask);
  EXPECT_EQ(mask.kind(), VoxelKind::label);
  EXPECT_EQ(mask, voxelize(load_mesh(dir / "case1" / "tree.obj"), s.volume().grid()));
  const MetricSextet self = evaluate_case(mask, mask, nullptr, {});
  for (std::size_t m = 0; m < 6; ++m) EXPECT_EQ(*self[m], 1.0);

  const std::string pose = testing_support::slurp(r.pose), obj = testing_support::slurp(r.mesh);
  const SaveReport again = s.save_gt(dir / "out2");
  EXPECT_EQ(testing_support::slurp(again.pose), pose);
  EXPECT_EQ(testing_support::slurp(again.mesh), obj);
  EXPECT_EQ(testing_support::slurp(again.mask), testing_support::slurp(r.mask));
}

TEST(Session, SavedPoseReloadsToSameMesh) {
  TempDir dir;
  Session s = open_case(dir);
  s.apply(RotateEdit{distal_bone(s.state().armature), quarter_about_x()});
  s.apply(RigidEdit{Rigid{Quat::from_axis_angle({0, 0, 1}, 0.2), {0.5, 0, 0}}});
  const SaveReport r = s.save_gt(dir / "out");
  const ArmatureDocument doc = armature_from_json(testing_support::slurp(r.pose));
  Session fresh = Session::open(s.case_dir());
  fresh.apply(SetPoseEdit{doc.pose});
  EXPECT_EQ(fresh.state().deformed, s.state().deformed);
  const SaveReport r2 = fresh.save_gt(dir / "out2");
  EXPECT_EQ(testing_support::slurp(r2.pose), testing_support::slurp(r.pose));
  EXPECT_EQ(testing_support::slurp(r2.mesh), testing_support::slurp(r.mesh));
}

TEST(Session, LogLinesParseBack) {
  TempDir dir;
  Session s = open_case(dir);
  s.apply(RotateEdit{0, quarter_about_x()});
  s.apply(CutEdit{distal_bone(s.state().armature)});
  const std::string log = s.log_jsonl();
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2);
  EXPECT_NE(log.find("\"time\""), std::string::npos);
  EXPECT_NE(log.find("\"type\":\"cut\""), std::string::npos);
  EXPECT_COROTK_ERROR(edit_from_json("{\"type\": \"teleport\"}"), ErrorCode::format);
  EXPECT_COROTK_ERROR(edit_from_json("not json"), ErrorCode::format);
  const Edit e = edit_from_json(R"({"type": "rotate", "bone": 2, "axis": [0, 0, 1], "angle_deg": 90})");
  const auto& rot = std::get<RotateEdit>(e);
  EXPECT_EQ(rot.bone, 2);
  EXPECT_NEAR(rot.rotation.w, std::sqrt(0.5), 1e-12);
}

TEST(ArmatureFromMesh, RootFarthestFromSurfaceWithoutOstium) {
  TempDir dir;
  synthetic::write_case(dir / "c", {.ostium = false});
  const Session s = Session::open(dir / "c");
  EXPECT_GE(s.state().armature.size(), 4u);
  for (const auto& b : s.state().armature.bones()) {
    EXPECT_NEAR(b.head.x, 6.0, 0.6);
    EXPECT_NEAR(b.head.y, 6.0, 0.6);
  }
}
