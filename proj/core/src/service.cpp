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

#include "corotk/service.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "corotk/error.hpp"
#include "corotk/png.hpp"
#include "httplib.h"
#include "json.hpp"

namespace corotk {
namespace {

using nlohmann::json;

struct NoSession : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Entry {
  explicit Entry(Session s) : session(std::move(s)) {}
  std::shared_mutex mutex;
  Session session;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_case:
      return 404;
    case ErrorCode::io:
      return 500;
    default:
      return 400;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

json contours_json(const ContourSet& c, const Grid& grid, const std::string& warning) {
  json polys = json::array();
  for (const auto& loop : c.polygons) {
    json pts = json::array();
    for (const auto& p : loop) pts.push_back({p.x, p.y});
    polys.push_back(std::move(pts));
  }
  json out{{"slice_index", c.slice_index},
           {"z_mm", c.z_mm},
           {"spacing", {grid.spacing[0], grid.spacing[1]}},
           {"polygons", std::move(polys)}};
  if (!warning.empty()) out["warning"] = warning;
  return out;
}

json session_json(const std::string& id, const Session& s) {
  const Grid& g = s.volume().grid();
  const auto& st = s.state();
  return {{"id", id},
          {"case", s.case_id()},
          {"cursor", s.cursor()},
          {"log_length", s.log().size()},
          {"dims", {g.dims[0], g.dims[1], g.dims[2]}},
          {"spacing", {g.spacing[0], g.spacing[1], g.spacing[2]}},
          {"origin", {g.origin.x, g.origin.y, g.origin.z}},
          {"vertex_count", st.deformed.vertices.size()},
          {"armature", json::parse(to_json(st.armature, st.pose))}};
}

bool plain_name(const std::string& name) {
  return !name.empty() && name != "." && name != ".." && name.find('/') == std::string::npos &&
         name.find('\\') == std::string::npos;
}

}  // namespace

struct RegistrationService::Impl {
  ServiceOptions options;
  httplib::Server server;
  std::thread worker;
  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::uint64_t next_id = 1;

  std::shared_ptr<Entry> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw NoSession("no session '" + id + "'");
    return it->second;
  }

  // Runs a handler, mapping exceptions to JSON error bodies.
  template <class F>
  httplib::Server::Handler wrap(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), code_name(e.code()), e.what());
      } catch (const NoSession& e) {
        send_error(res, 404, "unknown_session", e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "format", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes(RegistrationService& self);
};

RegistrationService::RegistrationService(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->routes(*this);
}

RegistrationService::~RegistrationService() { stop(); }

std::vector<std::string> RegistrationService::cases() const {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(impl_->options.cases_dir, ec)) {
    if (!entry.is_directory()) continue;
    const auto& p = entry.path();
    if ((fs::exists(p / "scan.nii.gz") || fs::exists(p / "scan.nii")) && fs::exists(p / "tree.obj"))
      out.push_back(p.filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RegistrationService::Impl::routes(RegistrationService& self) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (!options.ui_dir.empty()) server.set_mount_point("/", options.ui_dir.string());

  server.Get("/cases", wrap([&self](const httplib::Request&, httplib::Response& res) {
               send_json(res, {{"cases", self.cases()}});
             }));

  server.Post("/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
                const std::string name = json::parse(req.body).at("case").get<std::string>();
                if (!plain_name(name)) throw Error(ErrorCode::missing_case, "bad case name '" + name + "'");
                auto entry = std::make_shared<Entry>(Session::open(options.cases_dir / name, options.session));
                std::string id;
                {
                  std::lock_guard lock(sessions_mutex);
                  id = "s" + std::to_string(next_id++);
                  sessions.emplace(id, entry);
                }
                std::shared_lock lock(entry->mutex);
                send_json(res, session_json(id, entry->session), 201);
              }));

  server.Get(R"(/sessions/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
               auto entry = find(req.matches[1]);
               std::shared_lock lock(entry->mutex);
               send_json(res, session_json(req.matches[1], entry->session));
             }));

  server.Get(R"(/sessions/([^/]+)/slices/(-?\d+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
               auto entry = find(req.matches[1]);
               WindowSpec w = kNonContrastWindow;
               if (req.has_param("low")) w.low = std::stod(req.get_param_value("low"));
               if (req.has_param("high")) w.high = std::stod(req.get_param_value("high"));
               w.validate();
               const std::int64_t k = std::stoll(req.matches[2]);
               GrayImage image;
               {
                 std::shared_lock lock(entry->mutex);
                 image = window_slice(entry->session.volume(), k, w);
               }
               const auto png = encode_png(image);
               res.set_content(std::string(png.begin(), png.end()), "image/png");
             }));

  server.Get(R"(/sessions/([^/]+)/contours/(-?\d+))",
             wrap([this](const httplib::Request& req, httplib::Response& res) {
               auto entry = find(req.matches[1]);
               const std::int64_t k = std::stoll(req.matches[2]);
               std::shared_lock lock(entry->mutex);
               const Session& s = entry->session;
               ContourSet c;
               std::string warning;
               try {
                 c = s.contours(k);
               } catch (const Error& e) {
                 if (e.code() != ErrorCode::open_loop) throw;
                 c.slice_index = k;
                 c.z_mm = static_cast<double>(k) * s.volume().grid().spacing[2];
                 warning = e.what();
               }
               send_json(res, contours_json(c, s.volume().grid(), warning));
             }));

  server.Post(R"(/sessions/([^/]+)/edits)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                auto entry = find(req.matches[1]);
                const Edit edit = edit_from_json(req.body);
                std::unique_lock lock(entry->mutex);
                entry->session.apply(edit);
                send_json(res, session_json(req.matches[1], entry->session));
              }));

  auto step = [this](bool forward) {
    return wrap([this, forward](const httplib::Request& req, httplib::Response& res) {
      auto entry = find(req.matches[1]);
      std::unique_lock lock(entry->mutex);
      const bool moved = forward ? entry->session.redo() : entry->session.undo();
      json body = session_json(req.matches[1], entry->session);
      body["changed"] = moved;
      send_json(res, body);
    });
  };
  server.Post(R"(/sessions/([^/]+)/undo)", step(false));
  server.Post(R"(/sessions/([^/]+)/redo)", step(true));

  server.Post(R"(/sessions/([^/]+)/save)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                auto entry = find(req.matches[1]);
                std::shared_lock lock(entry->mutex);
                std::filesystem::path out = entry->session.case_dir() / "gt";
                if (!req.body.empty()) {
                  const json body = json::parse(req.body);
                  if (body.contains("out_dir")) out = body.at("out_dir").get<std::string>();
                }
                const SaveReport r = entry->session.save_gt(out);
                json j{{"mesh", r.mesh.string()}, {"pose", r.pose.string()}, {"log", r.log.string()}};
                j["mask"] = r.mask.empty() ? json(nullptr) : json(r.mask.string());
                if (r.voxelization_error) j["voxelization_error"] = *r.voxelization_error;
                send_json(res, j);
              }));
}

int RegistrationService::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void RegistrationService::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
}

void RegistrationService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace corotk
