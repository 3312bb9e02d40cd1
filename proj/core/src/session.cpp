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

#include "corotk/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "corotk/error.hpp"
#include "corotk/nifti.hpp"
#include "corotk/skeleton.hpp"
#include "json.hpp"

namespace corotk {
namespace {

using nlohmann::json;

json vec_json(Vec3 p) { return json::array({p.x, p.y, p.z}); }
json quat_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

Vec3 json_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::format, "expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
Quat json_quat(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::format, "expected [w, x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json pose_json(const Pose& pose) {
  json local = json::object();
  for (const auto& [id, q] : pose.local) local[std::to_string(id)] = quat_json(q);
  return {{"global", {{"q", quat_json(pose.global.rotation)}, {"t", vec_json(pose.global.translation)}}},
          {"local", std::move(local)}};
}

Pose json_pose(const json& j) {
  Pose p;
  if (j.contains("global")) {
    p.global.rotation = json_quat(j.at("global").at("q"));
    p.global.translation = json_vec(j.at("global").at("t"));
  }
  if (j.contains("local"))
    for (const auto& [key, q] : j.at("local").items()) p.local[std::stoi(key)] = json_quat(q);
  return p;
}

json edit_json(const Edit& edit) {
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, RotateEdit>) {
          return {{"type", "rotate"}, {"bone", e.bone}, {"q", quat_json(e.rotation)}};
        } else if constexpr (std::is_same_v<T, RigidEdit>) {
          return {{"type", "rigid"}, {"q", quat_json(e.transform.rotation)}, {"t", vec_json(e.transform.translation)}};
        } else if constexpr (std::is_same_v<T, CutEdit>) {
          return {{"type", "cut"}, {"bone", e.bone}};
        } else if constexpr (std::is_same_v<T, NudgeEdit>) {
          return {{"type", "vertex_nudge"}, {"vertex", e.vertex}, {"delta", vec_json(e.delta)}};
        } else {
          return {{"type", "set_pose"}, {"pose", pose_json(e.pose)}};
        }
      },
      edit);
}

Edit parse_edit(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "rotate") {
    RotateEdit e;
    e.bone = j.at("bone").get<int>();
    if (j.contains("q")) {
      e.rotation = json_quat(j.at("q"));
    } else {
      const double deg = j.at("angle_deg").get<double>();
      e.rotation = Quat::from_axis_angle(json_vec(j.at("axis")), deg * std::numbers::pi / 180.0);
    }
    return e;
  }
  if (type == "rigid") {
    RigidEdit e;
    if (j.contains("q")) e.transform.rotation = json_quat(j.at("q"));
    if (j.contains("t")) e.transform.translation = json_vec(j.at("t"));
    return e;
  }
  if (type == "cut") return CutEdit{j.at("bone").get<int>()};
  if (type == "vertex_nudge") {
    const auto v = j.at("vertex").get<std::int64_t>();
    if (v < 0) throw Error(ErrorCode::unknown_id, "negative vertex index");
    return NudgeEdit{static_cast<std::uint32_t>(v), json_vec(j.at("delta"))};
  }
  if (type == "set_pose") return SetPoseEdit{json_pose(j.at("pose"))};
  throw Error(ErrorCode::format, "unknown edit type '" + type + "'");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + p.string());
}

// Linear part of the blended transform at vertex v.
Mat3 blended_rotation(const std::vector<BoneWeight>& weights, const std::map<int, PosedBone>& posed) {
  Mat3 m{};
  m.m = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
  double total = 0.0;
  for (const auto& w : weights) {
    const Mat3 r = posed.at(w.bone).transform.rotation.to_matrix();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) += w.weight * r(i, j);
    total += w.weight;
  }
  if (total == 0.0) return Mat3::identity();
  return m;
}

}  // namespace

Edit edit_from_json(const std::string& text) {
  try {
    return parse_edit(json::parse(text));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::format, std::string("edit JSON: ") + ex.what());
  }
}

std::string to_json(const LoggedEdit& edit) {
  json j = edit_json(edit.edit);
  j["time"] = edit.time;
  return j.dump();
}

RegistrationState apply_edit(const RegistrationState& state, const Edit& edit) {
  RegistrationState next = state;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, RotateEdit>) {
          next.pose = pose_rotate(state.armature, state.pose, e.bone, e.rotation);
        } else if constexpr (std::is_same_v<T, RigidEdit>) {
          next.pose = rigid_align(state.armature, state.pose, e.transform);
        } else if constexpr (std::is_same_v<T, CutEdit>) {
          CutResult cut = cut_branch(state.armature, state.rest, state.pose, e.bone);
          next.armature = std::move(cut.armature);
          next.rest = std::move(cut.mesh);
          next.pose = std::move(cut.pose);
        } else if constexpr (std::is_same_v<T, NudgeEdit>) {
          if (e.vertex >= state.rest.vertices.size())
            throw Error(ErrorCode::unknown_id, "no vertex " + std::to_string(e.vertex));
          const auto posed = forward_kinematics(state.armature, state.pose);
          const Mat3 m = blended_rotation(state.rest.weights[e.vertex], posed);
          next.rest.vertices[e.vertex] += inverse(m) * e.delta;
        } else {
          validate_pose(state.armature, e.pose);
          next.pose = e.pose;
        }
      },
      edit);
  next.deformed = deform_mesh(next.rest, next.armature, next.pose);
  return next;
}

Armature armature_from_mesh(const SurfaceMesh& mesh, double voxel_mm, std::optional<Vec3> ostium,
                            double max_bone_length_mm) {
  if (!(voxel_mm > 0.0)) throw Error(ErrorCode::input, "voxel size must be positive");
  if (mesh.vertices.empty()) throw Error(ErrorCode::input, "mesh is empty");
  Vec3 lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  Grid grid;
  grid.spacing = {voxel_mm, voxel_mm, voxel_mm};
  grid.origin = lo - Vec3{2 * voxel_mm, 2 * voxel_mm, 2 * voxel_mm};
  for (int a = 0; a < 3; ++a) grid.dims[a] = static_cast<std::int64_t>(std::ceil((hi[a] - lo[a]) / voxel_mm)) + 5;

  const Volume mask = voxelize(mesh, grid);
  const CenterlineGraph raw = prune_spurs(extract_graph(skeletonize(mask)), 4.0 * voxel_mm);

  // Keep the connected piece with the longest centerline.
  std::vector<std::size_t> comp(raw.nodes.size());
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](std::size_t x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (const auto& e : raw.edges) comp[find(e.a)] = find(e.b);
  std::map<std::size_t, double> length;
  for (const auto& e : raw.edges) length[find(e.a)] += e.length();
  if (length.empty()) throw Error(ErrorCode::connectivity, "mesh skeleton has no centerline edges");
  std::size_t best = length.begin()->first;
  for (const auto& [c, len] : length)
    if (len > length[best]) best = c;

  CenterlineGraph g;
  std::vector<std::size_t> remap(raw.nodes.size(), 0);
  for (std::size_t n = 0; n < raw.nodes.size(); ++n)
    if (find(n) == best) {
      remap[n] = g.nodes.size();
      g.nodes.push_back(raw.nodes[n]);
    }
  for (const auto& e : raw.edges)
    if (find(e.a) == best) g.edges.push_back({remap[e.a], remap[e.b], e.points});

  const auto deg = g.degrees();
  std::optional<std::size_t> root;
  double score = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    if (deg[n] != 1) continue;
    double s = 0.0;
    if (ostium) {
      s = -distance(g.nodes[n].position, *ostium);
    } else {
      s = std::numeric_limits<double>::infinity();
      for (const auto& v : mesh.vertices) s = std::min(s, distance(v, g.nodes[n].position));
    }
    if (s > score) {
      score = s;
      root = n;
    }
  }
  if (!root) throw Error(ErrorCode::root, "mesh centerline has no endpoint to root the armature");
  g.nodes[*root].kind = NodeKind::root;
  return build_armature(g, max_bone_length_mm);
}

Session Session::open(const std::filesystem::path& case_dir, const SessionOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(case_dir)) throw Error(ErrorCode::missing_case, "no case directory " + case_dir.string());
  fs::path scan = case_dir / "scan.nii.gz";
  if (!fs::exists(scan)) scan = case_dir / "scan.nii";
  if (!fs::exists(scan)) throw Error(ErrorCode::missing_case, "case lacks scan.nii.gz: " + case_dir.string());
  const fs::path tree = case_dir / "tree.obj";
  if (!fs::exists(tree)) throw Error(ErrorCode::missing_case, "case lacks tree.obj: " + case_dir.string());

  Session s;
  s.case_dir_ = case_dir;
  s.case_id_ = case_dir.filename().string();
  if (s.case_id_.empty()) s.case_id_ = case_dir.parent_path().filename().string();
  s.volume_ = read_volume(scan, KindHint::intensity);
  const SurfaceMesh mesh = load_mesh(tree);

  Armature armature;
  if (fs::exists(case_dir / "armature.json")) {
    armature = armature_from_json(read_text(case_dir / "armature.json")).armature;
  } else {
    std::optional<Vec3> ostium;
    if (fs::exists(case_dir / "ostium.json")) {
      try {
        ostium = json_vec(json::parse(read_text(case_dir / "ostium.json")).at("point"));
      } catch (const json::exception& ex) {
        throw Error(ErrorCode::format, std::string("ostium.json: ") + ex.what());
      }
    }
    const auto& sp = s.volume_.grid().spacing;
    armature = armature_from_mesh(mesh, std::min({sp[0], sp[1], sp[2]}), ostium, options.max_bone_length_mm);
  }
  s.initial_.armature = armature;
  s.initial_.rest = compute_weights(mesh, armature, options.weight_neighbors);
  s.initial_.deformed = deform_mesh(s.initial_.rest, armature, s.initial_.pose);
  s.state_ = s.initial_;
  return s;
}

void Session::rebuild() {
  RegistrationState st = initial_;
  for (std::size_t i = 0; i < cursor_; ++i) st = apply_edit(st, log_[i].edit);
  state_ = std::move(st);
}

void Session::apply(const Edit& edit) {
  RegistrationState next = apply_edit(state_, edit);
  log_.resize(cursor_);
  log_.push_back({edit, utc_now()});
  ++cursor_;
  state_ = std::move(next);
}

bool Session::undo() {
  if (cursor_ == 0) return false;
  --cursor_;
  rebuild();
  return true;
}

bool Session::redo() {
  if (cursor_ >= log_.size()) return false;
  state_ = apply_edit(state_, log_[cursor_].edit);
  ++cursor_;
  return true;
}

ContourSet Session::contours(std::int64_t k) const {
  const Grid& g = volume_.grid();
  if (k < 0 || k >= g.dims[2]) throw Error(ErrorCode::range, "slice index out of range");
  // Slice in the grid frame so the plane is exactly slice k.
  SurfaceMesh local = cap_holes(state_.deformed);
  const Mat3 to_local = transpose(g.direction);
  for (auto& v : local.vertices) v = to_local * (v - g.origin);
  ContourSet c = slice_contours(local, static_cast<double>(k) * g.spacing[2]);
  c.slice_index = k;
  return c;
}

SliceView Session::get_slice(std::int64_t k, const WindowSpec& window) const {
  SliceView view;
  view.image = window_slice(volume_, k, window);
  try {
    view.contours = contours(k);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::open_loop) throw;
    view.contours.slice_index = k;
    view.contours.z_mm = static_cast<double>(k) * volume_.grid().spacing[2];
    view.warning = e.what();
  }
  return view;
}

SaveReport Session::save_gt(const std::filesystem::path& out_dir) const {
  std::filesystem::create_directories(out_dir);
  SaveReport r;
  r.mesh = out_dir / "tree_aligned.obj";
  save_mesh(state_.deformed, r.mesh);
  r.pose = out_dir / "pose.json";
  write_text(r.pose, to_json(state_.armature, state_.pose) + "\n");
  r.log = out_dir / "edits.jsonl";
  write_text(r.log, log_jsonl());
  try {
    const Volume mask = voxelize(cap_holes(state_.deformed), volume_.grid());
    r.mask = out_dir / "gt_mask.nii.gz";
    write_volume(mask, r.mask);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::open_loop) throw;
    r.voxelization_error = e.what();
  }
  return r;
}

std::string Session::log_jsonl() const {
  std::string out;
  for (std::size_t i = 0; i < cursor_; ++i) out += to_json(log_[i]) + "\n";
  return out;
}

void Session::replay_jsonl(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    apply(edit_from_json(line));
  }
}

}  // namespace corotk
