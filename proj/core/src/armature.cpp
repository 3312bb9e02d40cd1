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

#include "corotk/armature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "corotk/error.hpp"
#include "json.hpp"

namespace corotk {

Armature::Armature(std::vector<Bone> bones) {
  if (bones.empty()) return;
  std::map<int, const Bone*> by_id;
  for (const auto& b : bones) {
    if (!by_id.emplace(b.id, &b).second) throw Error(ErrorCode::input, "duplicate bone id " + std::to_string(b.id));
    if (!(b.rest_length > 0.0)) throw Error(ErrorCode::input, "bone " + std::to_string(b.id) + " has zero length");
  }
  std::vector<int> roots;
  std::map<int, std::vector<int>> children;
  for (const auto& b : bones) {
    if (!b.parent) {
      roots.push_back(b.id);
      continue;
    }
    auto it = by_id.find(*b.parent);
    if (it == by_id.end())
      throw Error(ErrorCode::connectivity, "bone " + std::to_string(b.id) + " has a missing parent");
    if (distance(it->second->tail, b.head) > 1e-6)
      throw Error(ErrorCode::input, "bone " + std::to_string(b.id) + " head is detached from its parent's tail");
    children[*b.parent].push_back(b.id);
  }
  if (roots.size() != 1) throw Error(ErrorCode::root, "armature needs exactly one root bone");
  root_ = roots.front();

  // Parents-first order, children in ascending id order.
  std::deque<int> queue{root_};
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    index_[id] = bones_.size();
    bones_.push_back(*by_id.at(id));
    auto& kids = children[id];
    std::sort(kids.begin(), kids.end());
    for (int c : kids) queue.push_back(c);
  }
  if (bones_.size() != bones.size()) throw Error(ErrorCode::connectivity, "armature has a cycle or unreachable bones");
  children_ = std::move(children);
}

const Bone& Armature::bone(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::unknown_id, "no bone with id " + std::to_string(id));
  return bones_[it->second];
}

const std::vector<int>& Armature::children(int id) const {
  static const std::vector<int> none;
  bone(id);
  auto it = children_.find(id);
  return it == children_.end() ? none : it->second;
}

std::vector<int> Armature::subtree(int id) const {
  std::vector<int> out{id};
  bone(id);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (int c : children(out[i])) out.push_back(c);
  return out;
}

Quat Pose::local_rotation(int id) const {
  auto it = local.find(id);
  return it == local.end() ? Quat::identity() : it->second;
}

namespace {

Vec3 point_at(const std::vector<Vec3>& pts, const std::vector<double>& cum, double s) {
  if (s <= 0.0) return pts.front();
  if (s >= cum.back()) return pts.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const auto i = static_cast<std::size_t>(it - cum.begin());
  const double seg = cum[i] - cum[i - 1];
  const double t = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
  return pts[i - 1] + t * (pts[i] - pts[i - 1]);
}

void require_unit(const Quat& q, const std::string& what) {
  if (!(std::abs(q.norm() - 1.0) <= 1e-9)) throw Error(ErrorCode::input, what + " is not a unit quaternion");
}

}  // namespace

Armature build_armature(const CenterlineGraph& graph, double max_bone_length_mm) {
  if (!(max_bone_length_mm > 0.0)) throw Error(ErrorCode::input, "max bone length must be positive");
  std::vector<std::size_t> roots;
  for (std::size_t n = 0; n < graph.nodes.size(); ++n)
    if (graph.nodes[n].kind == NodeKind::root) roots.push_back(n);
  if (roots.empty()) throw Error(ErrorCode::root, "graph has no root node");
  if (roots.size() > 1) throw Error(ErrorCode::root, "graph has more than one root node");
  const std::size_t root = roots.front();

  std::vector<std::vector<std::size_t>> incident(graph.nodes.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    incident[graph.edges[e].a].push_back(e);
    if (graph.edges[e].b != graph.edges[e].a) incident[graph.edges[e].b].push_back(e);
  }
  if (incident[root].size() != 1) throw Error(ErrorCode::root, "root node must be an endpoint with one edge");

  std::vector<Bone> bones;
  std::vector<std::optional<int>> tail_bone(graph.nodes.size());  // last bone ending at node
  std::vector<bool> reached(graph.nodes.size(), false);
  std::vector<bool> used(graph.edges.size(), false);
  std::deque<std::size_t> queue{root};
  reached[root] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const std::size_t e : incident[u]) {
      if (used[e]) continue;
      used[e] = true;
      const GraphEdge& edge = graph.edges[e];
      const std::size_t v = edge.a == u ? edge.b : edge.a;
      if (reached[v]) continue;  // closes a cycle; its section already has bones
      std::vector<Vec3> pts = edge.points;
      if (edge.a != u) std::reverse(pts.begin(), pts.end());
      std::vector<double> cum{0.0};
      for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + distance(pts[i - 1], pts[i]));
      const double length = cum.back();
      if (!(length > 0.0)) throw Error(ErrorCode::input, "edge of zero length");
      const auto pieces = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(length / max_bone_length_mm - 1e-9)));
      std::optional<int> parent = tail_bone[u];
      Vec3 head = parent ? bones[static_cast<std::size_t>(*parent)].tail : pts.front();
      for (std::size_t k = 1; k <= pieces; ++k) {
        const Vec3 tail = k == pieces ? pts.back() : point_at(pts, cum, length * static_cast<double>(k) / static_cast<double>(pieces));
        Bone b;
        b.id = static_cast<int>(bones.size());
        b.parent = parent;
        b.head = head;
        b.tail = tail;
        b.rest_length = distance(head, tail);
        bones.push_back(b);
        parent = b.id;
        head = tail;
      }
      tail_bone[v] = parent;
      reached[v] = true;
      queue.push_back(v);
    }
  }
  for (std::size_t n = 0; n < graph.nodes.size(); ++n)
    if (!reached[n]) throw Error(ErrorCode::connectivity, "centerline graph is not connected");
  return Armature(std::move(bones));
}

SurfaceMesh compute_weights(const SurfaceMesh& mesh, const Armature& armature, int k) {
  if (armature.empty()) throw Error(ErrorCode::input, "armature has no bones");
  if (k < 1) throw Error(ErrorCode::input, "k must be at least 1");
  SurfaceMesh out = mesh;
  out.weights.assign(mesh.vertices.size(), {});
  const auto& bones = armature.bones();
  std::vector<std::pair<double, int>> dist(bones.size());
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), bones.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    for (std::size_t b = 0; b < bones.size(); ++b)
      dist[b] = {point_segment_distance(mesh.vertices[v], bones[b].head, bones[b].tail), bones[b].id};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
    double sum = 0.0;
    std::vector<BoneWeight> ws;
    for (std::size_t i = 0; i < keep; ++i) {
      const double d = dist[i].first + kWeightEpsilon;
      const double w = 1.0 / (d * d);
      ws.push_back({dist[i].second, w});
      sum += w;
    }
    for (auto& w : ws) w.weight /= sum;
    out.weights[v] = std::move(ws);
  }
  return out;
}

void validate_pose(const Armature& armature, const Pose& pose) {
  require_unit(pose.global.rotation, "global rotation");
  for (const auto& [id, q] : pose.local) {
    if (!armature.contains(id)) throw Error(ErrorCode::unknown_id, "pose references missing bone " + std::to_string(id));
    require_unit(q, "rotation of bone " + std::to_string(id));
  }
}

std::map<int, PosedBone> forward_kinematics(const Armature& armature, const Pose& pose) {
  std::map<int, PosedBone> out;
  for (const auto& b : armature.bones()) {
    const Rigid parent = b.parent ? out.at(*b.parent).transform : pose.global;
    const Quat q = pose.local_rotation(b.id);
    const Rigid t = q == Quat::identity() ? parent : parent * Rigid::about(q, b.head);
    out[b.id] = {t, t.apply(b.head), t.apply(b.tail)};
  }
  return out;
}

Pose pose_rotate(const Armature& armature, const Pose& pose, int bone_id, const Quat& delta) {
  const Bone& b = armature.bone(bone_id);
  require_unit(delta, "rotation");
  Quat parent_rot = pose.global.rotation;
  if (b.parent) parent_rot = forward_kinematics(armature, pose).at(*b.parent).transform.rotation;
  Pose out = pose;
  // World rotation D about the posed head == local rotation Qp^-1 D Qp applied first.
  const Quat local = (parent_rot.conjugate() * delta * parent_rot * pose.local_rotation(bone_id)).normalized();
  out.local[bone_id] = local;
  return out;
}

Pose rigid_align(const Armature& armature, const Pose& pose, const Rigid& transform) {
  require_unit(transform.rotation, "alignment rotation");
  validate_pose(armature, pose);
  Pose out = pose;
  out.global = transform * pose.global;
  return out;
}

SurfaceMesh deform_mesh(const SurfaceMesh& mesh, const Armature& armature, const Pose& pose) {
  if (!mesh.has_weights() || mesh.weights.size() != mesh.vertices.size())
    throw Error(ErrorCode::weight, "mesh has no skinning weights");
  const auto posed = forward_kinematics(armature, pose);
  SurfaceMesh out = mesh;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3 p = mesh.vertices[v];
    Vec3 shift{};
    for (const auto& w : mesh.weights[v]) {
      auto it = posed.find(w.bone);
      if (it == posed.end()) throw Error(ErrorCode::weight, "weight on missing bone " + std::to_string(w.bone));
      if (it->second.transform.is_identity() || w.weight == 0.0) continue;
      shift += w.weight * (it->second.transform.apply(p) - p);
    }
    out.vertices[v] = p + shift;
  }
  return out;
}

CutResult cut_branch(const Armature& armature, const SurfaceMesh& mesh, const Pose& pose, int bone_id) {
  const Bone& b = armature.bone(bone_id);
  if (!b.parent) throw Error(ErrorCode::root, "the root bone cannot be cut");
  if (!mesh.has_weights() || mesh.weights.size() != mesh.vertices.size())
    throw Error(ErrorCode::weight, "mesh has no skinning weights");
  const auto removed_ids = armature.subtree(bone_id);
  const std::set<int> removed(removed_ids.begin(), removed_ids.end());

  CutResult out;
  std::vector<Bone> kept;
  for (const auto& bone : armature.bones())
    if (!removed.count(bone.id)) kept.push_back(bone);
  out.armature = Armature(std::move(kept));
  out.pose = pose;
  for (int id : removed_ids) out.pose.local.erase(id);

  std::vector<std::int64_t> remap(mesh.vertices.size(), -1);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto& ws = mesh.weights[v];
    int dominant = std::numeric_limits<int>::max();
    double best = -1.0;
    for (const auto& w : ws)
      if (w.weight > best || (w.weight == best && w.bone < dominant)) {
        best = w.weight;
        dominant = w.bone;
      }
    if (ws.empty() || removed.count(dominant)) continue;
    std::vector<BoneWeight> kept_w;
    double sum = 0.0;
    for (const auto& w : ws)
      if (!removed.count(w.bone)) {
        kept_w.push_back(w);
        sum += w.weight;
      }
    for (auto& w : kept_w) w.weight /= sum;
    remap[v] = static_cast<std::int64_t>(out.mesh.vertices.size());
    out.mesh.vertices.push_back(mesh.vertices[v]);
    out.mesh.weights.push_back(std::move(kept_w));
  }
  for (const auto& t : mesh.triangles) {
    if (remap[t[0]] < 0 || remap[t[1]] < 0 || remap[t[2]] < 0) continue;
    out.mesh.triangles.push_back({static_cast<std::uint32_t>(remap[t[0]]), static_cast<std::uint32_t>(remap[t[1]]),
                                  static_cast<std::uint32_t>(remap[t[2]])});
  }
  return out;
}

namespace {

nlohmann::json vec_json(Vec3 p) { return nlohmann::json::array({p.x, p.y, p.z}); }
nlohmann::json quat_json(const Quat& q) { return nlohmann::json::array({q.w, q.x, q.y, q.z}); }

Vec3 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::format, "expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
Quat json_quat(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::format, "expected quaternion [w, x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string to_json(const Armature& armature, const Pose& pose) {
  nlohmann::json j;
  j["bones"] = nlohmann::json::array();
  for (const auto& b : armature.bones()) {
    j["bones"].push_back({{"id", b.id},
                          {"parent", b.parent ? nlohmann::json(*b.parent) : nlohmann::json()},
                          {"head", vec_json(b.head)},
                          {"tail", vec_json(b.tail)}});
  }
  nlohmann::json local = nlohmann::json::object();
  for (const auto& [id, q] : pose.local) local[std::to_string(id)] = quat_json(q);
  j["pose"] = {{"global", {{"q", quat_json(pose.global.rotation)}, {"t", vec_json(pose.global.translation)}}},
               {"local", std::move(local)}};
  return j.dump(2);
}

ArmatureDocument armature_from_json(const std::string& text) {
  ArmatureDocument doc;
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<Bone> bones;
    for (const auto& jb : j.at("bones")) {
      Bone b;
      b.id = jb.at("id").get<int>();
      if (jb.contains("parent") && !jb.at("parent").is_null()) b.parent = jb.at("parent").get<int>();
      b.head = json_vec(jb.at("head"));
      b.tail = json_vec(jb.at("tail"));
      b.rest_length = distance(b.head, b.tail);
      bones.push_back(b);
    }
    doc.armature = Armature(std::move(bones));
    if (j.contains("pose")) {
      const auto& jp = j.at("pose");
      if (jp.contains("global")) {
        doc.pose.global.rotation = json_quat(jp.at("global").at("q"));
        doc.pose.global.translation = json_vec(jp.at("global").at("t"));
      }
      if (jp.contains("local"))
        for (const auto& [key, q] : jp.at("local").items()) doc.pose.local[std::stoi(key)] = json_quat(q);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::format, std::string("armature JSON: ") + ex.what());
  }
  validate_pose(doc.armature, doc.pose);
  return doc;
}

}  // namespace corotk
