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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "corotk/session.hpp"

namespace corotk {

struct ServiceOptions {
  std::filesystem::path cases_dir;
  std::filesystem::path ui_dir;  // served at / when non-empty
  SessionOptions session;
};

// HTTP+JSON front end over a set of registration sessions.
//
//   GET  /cases
//   POST /sessions                     {"case": name}
//   GET  /sessions/{id}
//   GET  /sessions/{id}/slices/{k}     ?low=&high=  -> image/png
//   GET  /sessions/{id}/contours/{k}
//   POST /sessions/{id}/edits          edit JSON
//   POST /sessions/{id}/undo | /redo
//   POST /sessions/{id}/save           {"out_dir": optional}
//
// Sessions are independent. Within one, reads share a lock and edits take it
// exclusively, so edits apply one at a time in arrival order.
class RegistrationService {
 public:
  explicit RegistrationService(ServiceOptions options);
  ~RegistrationService();
  RegistrationService(const RegistrationService&) = delete;
  RegistrationService& operator=(const RegistrationService&) = delete;

  // Case directories (holding scan + tree.obj) under cases_dir, sorted.
  std::vector<std::string> cases() const;

  // Binds and serves on a background thread. Port 0 picks a free port; the
  // bound port is returned.
  int start(const std::string& host, int port);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace corotk
