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

#include <stdexcept>
#include <string>
#include <string_view>

namespace corotk {

enum class ErrorCode {
  format,          // malformed file contents
  unsupported,     // valid file, feature not handled
  truncated,       // payload shorter than the header promises
  io,              // open/read/write failure
  mode,            // interpolation mode not allowed for the volume kind
  input,           // argument violates a precondition
  geometry,        // grids do not match
  thinness,        // skeleton input is not thin
  range,           // index or arclength out of range
  unknown_id,      // bone / vertex / session id not present
  root,            // root missing or illegal root operation
  connectivity,    // graph is not connected
  weight,          // skinning weights missing or invalid
  open_loop,       // mesh is not watertight where it must be
  path,            // degenerate polyline
  degenerate_sample,
  missing_case,
  spec,            // invalid window bounds
};

std::string_view to_string(ErrorCode code) noexcept;
// Identifier spelling of the code, e.g. "unknown_id"; used in HTTP error bodies.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace corotk
