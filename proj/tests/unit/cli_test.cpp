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

#include <algorithm>
#include <cstdlib>
#include <json.hpp>

#include "corotk/mesh.hpp"
#include "corotk/nifti.hpp"
#include "phantoms.hpp"
#include "synthetic_case.hpp"
#include "testing.hpp"

using namespace corotk;
using nlohmann::json;
using testing_support::TempDir;

namespace {

int run(const std::string& args, const TempDir& dir) {
  const std::string cmd = std::string(COROTK_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

Volume tube_label(const Grid& g) {
  return voxelize(phantom::tube_mesh({6, 6, 2}, 18, 1.5, 16, 10), g);
}

}  // namespace

TEST(Cli, ResampleAndSkeletonize) {
  TempDir dir;
  const Grid g = phantom::grid({24, 24, 48}, 0.5);
  write_volume(tube_label(g), dir / "mask.nii.gz");
  ASSERT_EQ(run("resample --in " + q(dir / "mask.nii.gz") + " --out " + q(dir / "r.nii.gz") + " --spacing 0.25", dir), 0);
  EXPECT_EQ(read_volume(dir / "r.nii.gz").grid().dims[2], 96);
  ASSERT_EQ(run("skeletonize --in " + q(dir / "mask.nii.gz") + " --out " + q(dir / "s.nii.gz") + " --graph " +
                    q(dir / "g.json"),
                dir),
            0);
  const json graph = json::parse(testing_support::slurp(dir / "g.json"));
  EXPECT_GE(graph.at("nodes").size(), 2u);
  EXPECT_EQ(run("resample --in " + q(dir / "mask.nii.gz") + " --out " + q(dir / "x.nii") + " --mode trilinear", dir), 2);
}

TEST(Cli, EvaluateSelfIsPerfect) {
  TempDir dir;
  const Grid g = phantom::grid({24, 24, 48}, 0.5);
  std::filesystem::create_directories(dir / "pred");
  std::filesystem::create_directories(dir / "gt");
  write_volume(tube_label(g), dir / "pred" / "c1.nii.gz");
  write_volume(tube_label(g), dir / "gt" / "c1.nii.gz");
  ASSERT_EQ(run("evaluate --pred-dir " + q(dir / "pred") + " --gt-dir " + q(dir / "gt") + " --spacing 0 --report " +
                    q(dir / "report.json"),
                dir),
            0);
  const json report = json::parse(testing_support::slurp(dir / "report.json"));
  ASSERT_EQ(report.at("per_case").size(), 1u);
  EXPECT_EQ(report["per_case"][0].at("dice"), 1.0);
  EXPECT_EQ(report["summary"]["dice"].at("mean"), 1.0);
}

TEST(Cli, StatsAndVoxelizeAndArmature) {
  TempDir dir;
  testing_support::spit(dir / "a.txt", "1\n2\n3\n");
  testing_support::spit(dir / "b.txt", "4\n5\n6\n");
  ASSERT_EQ(run("stats --test mannwhitney --a " + q(dir / "a.txt") + " --b " + q(dir / "b.txt"), dir), 0);
  const json st = json::parse(testing_support::slurp(dir / "stdout.txt"));
  EXPECT_NEAR(st.at("p_value").get<double>(), 0.1, 1e-12);

  synthetic::write_case(dir / "case");
  ASSERT_EQ(run("voxelize --mesh " + q(dir / "case" / "tree.obj") + " --like " + q(dir / "case" / "scan.nii.gz") +
                    " --out " + q(dir / "v.nii.gz"),
                dir),
            0);
  const Volume v = read_volume(dir / "v.nii.gz");
  EXPECT_GT(std::count_if(v.data().begin(), v.data().end(), [](float x) { return x != 0.0f; }), 0);

  testing_support::spit(dir / "graph.json", R"({"nodes": [{"pos": [0, 0, 0], "kind": "root"},
    {"pos": [0, 0, 10], "kind": "endpoint"}], "edges": [{"a": 0, "b": 1, "points": [[0, 0, 0], [0, 0, 10]]}]})");
  ASSERT_EQ(run("armature build --graph " + q(dir / "graph.json") + " --out " + q(dir / "arm.json"), dir), 0)
      << testing_support::slurp(dir / "stdout.txt");
  EXPECT_EQ(json::parse(testing_support::slurp(dir / "arm.json")).at("bones").size(), 4u);
}

TEST(Cli, CprWritesPng) {
  TempDir dir;
  synthetic::write_case(dir / "case");
  testing_support::spit(dir / "path.json", "[[6, 6, 3], [6, 6, 8], [6, 6, 15]]");
  ASSERT_EQ(run("cpr --volume " + q(dir / "case" / "scan.nii.gz") + " --path " + q(dir / "path.json") + " --out " +
                    q(dir / "cpr.png"),
                dir),
            0)
      << testing_support::slurp(dir / "stdout.txt");
  const std::string png = testing_support::slurp(dir / "cpr.png");
  EXPECT_EQ(png.substr(1, 3), "PNG");
}

TEST(Cli, BadInputExitsWithErrorCode) {
  TempDir dir;
  testing_support::spit(dir / "junk.nii", std::string(400, 'x'));
  EXPECT_EQ(run("skeletonize --in " + q(dir / "junk.nii") + " --out " + q(dir / "o.nii"), dir), 2);
  EXPECT_NE(testing_support::slurp(dir / "stdout.txt").find("format error"), std::string::npos);
  testing_support::spit(dir / "short.nii", "not a nifti");
  EXPECT_EQ(run("skeletonize --in " + q(dir / "short.nii") + " --out " + q(dir / "o.nii"), dir), 2);
  EXPECT_NE(testing_support::slurp(dir / "stdout.txt").find("truncation error"), std::string::npos);
  EXPECT_NE(run("frobnicate", dir), 0);
}
