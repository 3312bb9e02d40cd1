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

#include <httplib.h>

#include <json.hpp>

#include "corotk/png.hpp"
#include "corotk/service.hpp"
#include "corotk/window.hpp"
#include "synthetic_case.hpp"
#include "testing.hpp"

using namespace corotk;
using nlohmann::json;
using testing_support::TempDir;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    synthetic::write_case(dir_ / "alpha");
    synthetic::write_case(dir_ / "beta");
    std::filesystem::create_directories(dir_ / "not_a_case");
    service_ = std::make_unique<RegistrationService>(ServiceOptions{dir_.path(), {}, {}});
    port_ = service_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { service_->stop(); }

  std::string open_session(const std::string& name) {
    auto r = client_->Post("/sessions", json{{"case", name}}.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 201);
    return json::parse(r->body).at("id");
  }
  json post(const std::string& path, const json& body) {
    auto r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200) << r->body;
    return json::parse(r->body);
  }

  TempDir dir_;
  std::unique_ptr<RegistrationService> service_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(ServiceTest, ListsCases) {
  auto r = client_->Get("/cases");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body).at("cases"), (json{"alpha", "beta"}));
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(ServiceTest, OpensSessionAndDescribesIt) {
  const std::string id = open_session("alpha");
  auto r = client_->Get("/sessions/" + id);
  ASSERT_TRUE(r);
  const json s = json::parse(r->body);
  EXPECT_EQ(s.at("case"), "alpha");
  EXPECT_EQ(s.at("cursor"), 0);
  EXPECT_EQ(s.at("dims"), (json{24, 24, 48}));
  EXPECT_GE(s.at("armature").at("bones").size(), 4u);
  EXPECT_NE(open_session("alpha"), id);
}

TEST_F(ServiceTest, UnknownCaseAndSessionAre404) {
  auto r = client_->Post("/sessions", R"({"case": "gamma"})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(json::parse(r->body).at("error"), "missing_case");
  r = client_->Post("/sessions", R"({"case": "../alpha"})", "application/json");
  EXPECT_EQ(r->status, 404);
  r = client_->Get("/sessions/s999");
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(json::parse(r->body).at("error"), "unknown_session");
}

TEST_F(ServiceTest, BadBodiesAre400) {
  const std::string id = open_session("alpha");
  auto r = client_->Post("/sessions", "{", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("error"), "format");
  r = client_->Post("/sessions/" + id + "/edits", R"({"type": "rotate", "bone": 9999, "q": [1, 0, 0, 0]})", "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("error"), "unknown_id");
  r = client_->Get("/sessions/" + id + "/slices/48");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("error"), "range");
  r = client_->Get("/sessions/" + id + "/slices/3?low=10&high=5");
  EXPECT_EQ(r->status, 400);
}

TEST_F(ServiceTest, SliceIsPng) {
  const std::string id = open_session("alpha");
  auto r = client_->Get("/sessions/" + id + "/slices/10");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
  const GrayImage img = decode_png(std::vector<std::uint8_t>(r->body.begin(), r->body.end()));
  EXPECT_EQ(img.width, 24);
  EXPECT_EQ(img.height, 24);
  // Slice 10 holds 40 HU plus 10 % 5 = 0.
  for (auto p : img.pixels) EXPECT_EQ(p, window_value(40.0, kNonContrastWindow));
  r = client_->Get("/sessions/" + id + "/slices/10?low=0&high=80");
  const GrayImage custom = decode_png(std::vector<std::uint8_t>(r->body.begin(), r->body.end()));
  EXPECT_EQ(custom.pixels.front(), window_value(40.0, {0.0, 80.0}));
}

TEST_F(ServiceTest, ContoursAndEditsRoundTrip) {
  const std::string id = open_session("alpha");
  auto r = client_->Get("/sessions/" + id + "/contours/20");
  ASSERT_TRUE(r);
  const json c0 = json::parse(r->body);
  EXPECT_EQ(c0.at("slice_index"), 20);
  EXPECT_DOUBLE_EQ(c0.at("z_mm").get<double>(), 10.0);
  ASSERT_EQ(c0.at("polygons").size(), 1u);

  const json after = post("/sessions/" + id + "/edits", {{"type", "rigid"}, {"q", {1, 0, 0, 0}}, {"t", {1.0, 0, 0}}});
  EXPECT_EQ(after.at("cursor"), 1);
  const json c1 = json::parse(client_->Get("/sessions/" + id + "/contours/20")->body);
  EXPECT_NEAR(c1["polygons"][0][0][0].get<double>() - c0["polygons"][0][0][0].get<double>(), 1.0, 1e-9);

  const json undone = post("/sessions/" + id + "/undo", json::object());
  EXPECT_EQ(undone.at("cursor"), 0);
  EXPECT_TRUE(undone.at("changed"));
  EXPECT_EQ(json::parse(client_->Get("/sessions/" + id + "/contours/20")->body), c0);
  EXPECT_FALSE(post("/sessions/" + id + "/undo", json::object()).at("changed"));
  EXPECT_EQ(post("/sessions/" + id + "/redo", json::object()).at("cursor"), 1);
}

TEST_F(ServiceTest, SaveWritesGroundTruth) {
  const std::string id = open_session("beta");
  post("/sessions/" + id + "/edits", {{"type", "rotate"}, {"bone", 0}, {"axis", {0, 0, 1}}, {"angle_deg", 10}});
  const json saved = post("/sessions/" + id + "/save", json::object());
  EXPECT_EQ(std::filesystem::path(saved.at("mesh").get<std::string>()).parent_path(), dir_ / "beta" / "gt");
  ASSERT_FALSE(saved.at("mask").is_null());
  EXPECT_TRUE(std::filesystem::exists(saved.at("mask").get<std::string>()));
  const std::string log = testing_support::slurp(saved.at("log").get<std::string>());
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1);
  const json custom = post("/sessions/" + id + "/save", {{"out_dir", (dir_ / "elsewhere").string()}});
  EXPECT_TRUE(std::filesystem::exists(dir_ / "elsewhere" / "pose.json"));
  EXPECT_EQ(testing_support::slurp(custom.at("pose").get<std::string>()),
            testing_support::slurp(saved.at("pose").get<std::string>()));
}

TEST_F(ServiceTest, PreflightIsAnswered) {
  auto r = client_->Options("/sessions");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);
  EXPECT_FALSE(r->get_header_value("Access-Control-Allow-Methods").empty());
}

TEST_F(ServiceTest, ConcurrentReadersSeeConsistentState) {
  const std::string id = open_session("alpha");
  std::vector<std::thread> workers;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t)
    workers.emplace_back([&] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < 10; ++i) {
        auto r = c.Get("/sessions/" + id + "/contours/" + std::to_string(4 + i));
        if (r && r->status == 200) ++ok;
      }
    });
  for (int i = 0; i < 5; ++i) post("/sessions/" + id + "/edits", {{"type", "rigid"}, {"q", {1, 0, 0, 0}}, {"t", {0.1, 0, 0}}});
  for (auto& w : workers) w.join();
  EXPECT_EQ(ok, 40);
  EXPECT_EQ(json::parse(client_->Get("/sessions/" + id)->body).at("cursor"), 5);
}
