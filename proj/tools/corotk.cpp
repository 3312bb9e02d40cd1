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

#include <algorithm>
#include <csignal>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corotk/armature.hpp"
#include "corotk/error.hpp"
#include "corotk/mesh.hpp"
#include "corotk/metrics.hpp"
#include "corotk/nifti.hpp"
#include "corotk/png.hpp"
#include "corotk/reformation.hpp"
#include "corotk/resample.hpp"
#include "corotk/service.hpp"
#include "corotk/skeleton.hpp"
#include "corotk/stats.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace corotk;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + p.string());
  out << text;
}

std::vector<double> read_reals(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw Error(ErrorCode::format, p.string() + ": not a number: " + line);
    }
  }
  return out;
}

// Accepts a bare [[x,y,z], ...] array, {"points": [...]}, or a centerline
// graph (its longest edge is used).
std::vector<Vec3> read_path(const fs::path& p) {
  const auto j = nlohmann::json::parse(read_text(p));
  auto points = [](const nlohmann::json& arr) {
    std::vector<Vec3> out;
    for (const auto& q : arr) out.push_back({q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>()});
    return out;
  };
  if (j.is_array()) return points(j);
  if (j.contains("points")) return points(j.at("points"));
  const CenterlineGraph g = graph_from_json(j.dump());
  if (g.edges.empty()) throw Error(ErrorCode::path, "centerline graph has no edges");
  const auto best = std::max_element(g.edges.begin(), g.edges.end(),
                                     [](const GraphEdge& a, const GraphEdge& b) { return a.length() < b.length(); });
  return best->points;
}

WindowSpec parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::spec, "window must be low,high");
  WindowSpec w{std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  w.validate();
  return w;
}

std::string nifti_stem(const fs::path& p) {
  std::string name = p.filename().string();
  for (const char* ext : {".nii.gz", ".nii"})
    if (name.size() > std::strlen(ext) && name.ends_with(ext)) return name.substr(0, name.size() - std::strlen(ext));
  return {};
}

std::vector<fs::path> nifti_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && !nifti_stem(e.path()).empty()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

fs::path find_case(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".nii.gz", ".nii"})
    if (fs::exists(dir / (stem + ext))) return dir / (stem + ext);
  throw Error(ErrorCode::missing_case, "no " + stem + " in " + dir.string());
}

RegistrationService* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corotk: coronary segmentation post-processing, evaluation and registration"};
  app.require_subcommand(1);

  auto* resample_cmd = app.add_subcommand("resample", "Resample a volume to a new spacing");
  std::string rs_in, rs_out, rs_mode = "nearest";
  double rs_spacing = 0.35;
  resample_cmd->add_option("--in", rs_in)->required();
  resample_cmd->add_option("--out", rs_out)->required();
  resample_cmd->add_option("--spacing", rs_spacing, "isotropic spacing in mm")->capture_default_str();
  resample_cmd->add_option("--mode", rs_mode)->check(CLI::IsMember({"nearest", "trilinear"}))->capture_default_str();

  auto* post_cmd = app.add_subcommand("postprocess", "Drop small and extra-pericardial components");
  std::string pp_mask, pp_peri, pp_out;
  double pp_min = 50.0;
  post_cmd->add_option("--mask", pp_mask)->required();
  post_cmd->add_option("--pericardium", pp_peri);
  post_cmd->add_option("--min-volume", pp_min, "mm^3; 0 disables")->capture_default_str();
  post_cmd->add_option("--out", pp_out)->required();

  auto* skel_cmd = app.add_subcommand("skeletonize", "Thin a binary mask and optionally extract its graph");
  std::string sk_in, sk_out, sk_graph;
  double sk_prune = 0.0;
  skel_cmd->add_option("--in", sk_in)->required();
  skel_cmd->add_option("--out", sk_out)->required();
  skel_cmd->add_option("--graph", sk_graph, "write the centerline graph JSON");
  skel_cmd->add_option("--prune", sk_prune, "remove spurs shorter than this (mm)")->capture_default_str();

  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  std::string ev_pred, ev_gt, ev_peri, ev_post = "none", ev_report;
  double ev_spacing = 0.35;
  eval_cmd->add_option("--pred-dir", ev_pred)->required();
  eval_cmd->add_option("--gt-dir", ev_gt)->required();
  eval_cmd->add_option("--pericardium-dir", ev_peri);
  eval_cmd->add_option("--postprocess", ev_post, "none | vol50,pericardium")->capture_default_str();
  eval_cmd->add_option("--report", ev_report);
  eval_cmd->add_option("--spacing", ev_spacing, "working resolution in mm; 0 keeps native grids")->capture_default_str();

  auto* stats_cmd = app.add_subcommand("stats", "Two-sided rank tests");
  std::string st_test, st_a, st_b;
  stats_cmd->add_option("--test", st_test)->required()->check(CLI::IsMember({"mannwhitney", "wilcoxon"}));
  stats_cmd->add_option("--a", st_a)->required();
  stats_cmd->add_option("--b", st_b)->required();

  auto* vox_cmd = app.add_subcommand("voxelize", "Rasterize a closed mesh on a reference grid");
  std::string vx_mesh, vx_like, vx_out;
  vox_cmd->add_option("--mesh", vx_mesh)->required();
  vox_cmd->add_option("--like", vx_like)->required();
  vox_cmd->add_option("--out", vx_out)->required();

  auto* arm_cmd = app.add_subcommand("armature", "Armature utilities");
  arm_cmd->require_subcommand(1);
  auto* arm_build = arm_cmd->add_subcommand("build", "Build an armature from a centerline graph");
  std::string ab_graph, ab_out;
  double ab_max = kDefaultMaxBoneLength;
  int ab_root = -1;
  arm_build->add_option("--graph", ab_graph)->required();
  arm_build->add_option("--out", ab_out)->required();
  arm_build->add_option("--max-bone", ab_max, "mm")->capture_default_str();
  arm_build->add_option("--root", ab_root, "graph node index to use as root (endpoint)");

  auto* cpr_cmd = app.add_subcommand("cpr", "Straightened curved planar reformation");
  std::string cp_vol, cp_path, cp_out, cp_window = "-120,200";
  double cp_w = 5.0, cp_ds = 0.35, cp_dt = 0.35;
  cpr_cmd->add_option("--volume", cp_vol)->required();
  cpr_cmd->add_option("--path", cp_path)->required();
  cpr_cmd->add_option("--out", cp_out)->required();
  cpr_cmd->add_option("--window", cp_window)->capture_default_str();
  cpr_cmd->add_option("--half-width", cp_w)->capture_default_str();
  cpr_cmd->add_option("--ds", cp_ds)->capture_default_str();
  cpr_cmd->add_option("--dt", cp_dt)->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Run the registration session service");
  std::string sv_cases, sv_ui, sv_host = "127.0.0.1";
  int sv_port = 8080;
  serve_cmd->add_option("--cases", sv_cases)->required();
  serve_cmd->add_option("--port", sv_port)->capture_default_str();
  serve_cmd->add_option("--host", sv_host)->capture_default_str();
  serve_cmd->add_option("--ui", sv_ui, "static files served at /");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*resample_cmd) {
      const Volume v = read_volume(rs_in);
      const auto mode = rs_mode == "nearest" ? Interpolation::nearest : Interpolation::trilinear;
      write_volume(resample(v, {rs_spacing, rs_spacing, rs_spacing}, mode), rs_out);
    } else if (*post_cmd) {
      const Volume mask = read_volume(pp_mask, KindHint::label);
      std::optional<Volume> peri;
      if (!pp_peri.empty()) peri = read_volume(pp_peri, KindHint::label);
      PostProcess flags;
      flags.vol50 = pp_min > 0.0;
      flags.min_volume_mm3 = pp_min;
      flags.pericardium = peri.has_value();
      write_volume(apply_postprocess(mask, peri ? &*peri : nullptr, flags), pp_out);
    } else if (*skel_cmd) {
      const Volume skel = skeletonize(read_volume(sk_in, KindHint::label));
      write_volume(skel, sk_out);
      if (!sk_graph.empty()) {
        CenterlineGraph g = extract_graph(skel);
        if (sk_prune > 0.0) g = prune_spurs(g, sk_prune);
        write_text(sk_graph, to_json(g) + "\n");
      }
    } else if (*eval_cmd) {
      const PostProcess flags = PostProcess::parse(ev_post);
      if (flags.pericardium && ev_peri.empty()) throw Error(ErrorCode::input, "pericardium variant needs --pericardium-dir");
      auto prepare = [&](const fs::path& p) {
        Volume v = read_volume(p, KindHint::label);
        if (ev_spacing > 0.0) v = resample(v, {ev_spacing, ev_spacing, ev_spacing}, Interpolation::nearest);
        return v;
      };
      std::vector<CaseResult> results;
      for (const auto& pred_path : nifti_files(ev_pred)) {
        const std::string stem = nifti_stem(pred_path);
        const Volume pred = prepare(pred_path);
        const Volume gt = prepare(find_case(ev_gt, stem));
        std::optional<Volume> peri;
        if (flags.pericardium) peri = prepare(find_case(ev_peri, stem));
        results.push_back({stem, evaluate_case(pred, gt, peri ? &*peri : nullptr, flags)});
      }
      if (results.empty()) throw Error(ErrorCode::input, "no NIfTI predictions in " + ev_pred);
      std::vector<MetricSextet> cohort;
      for (const auto& r : results) cohort.push_back(r.metrics);
      const CohortSummary summary = summarize(cohort);
      std::cout << "variant: " << flags.name() << "  cases: " << results.size() << "\n" << format_summary(summary);
      if (!ev_report.empty()) write_text(ev_report, report_json(results, summary) + "\n");
    } else if (*stats_cmd) {
      const auto a = read_reals(st_a);
      const auto b = read_reals(st_b);
      const TestResult r = st_test == "mannwhitney" ? mann_whitney_u(a, b) : wilcoxon_signed_rank(a, b);
      std::cout << to_json(r) << "\n";
    } else if (*vox_cmd) {
      const Volume like = read_volume(vx_like);
      write_volume(voxelize(load_mesh(vx_mesh), like.grid()), vx_out);
    } else if (*arm_build) {
      CenterlineGraph g = graph_from_json(read_text(ab_graph));
      if (ab_root >= 0) {
        if (static_cast<std::size_t>(ab_root) >= g.nodes.size()) throw Error(ErrorCode::unknown_id, "no node " + std::to_string(ab_root));
        for (auto& n : g.nodes)
          if (n.kind == NodeKind::root) n.kind = NodeKind::endpoint;
        g.nodes[static_cast<std::size_t>(ab_root)].kind = NodeKind::root;
      }
      const Armature arm = build_armature(g, ab_max);
      write_text(ab_out, to_json(arm, Pose{}) + "\n");
    } else if (*cpr_cmd) {
      const Volume v = read_volume(cp_vol, KindHint::intensity);
      const CprImage img = cpr(v, read_path(cp_path), cp_w, cp_ds, cp_dt);
      write_png(window_pixels(img.pixels, img.cols, img.rows, parse_window(cp_window)), cp_out);
    } else if (*serve_cmd) {
      ServiceOptions opts;
      opts.cases_dir = sv_cases;
      opts.ui_dir = sv_ui;
      RegistrationService service(opts);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << service.cases().size() << " case(s) on http://" << sv_host << ":" << sv_port << "\n";
      service.listen(sv_host, sv_port);
      g_service = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "corotk: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "corotk: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
