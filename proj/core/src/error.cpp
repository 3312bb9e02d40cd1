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

#include "corotk/error.hpp"

namespace corotk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::format: return "format";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::truncated: return "truncation";
    case ErrorCode::io: return "I/O";
    case ErrorCode::mode: return "mode";
    case ErrorCode::input: return "input";
    case ErrorCode::geometry: return "geometry";
    case ErrorCode::thinness: return "thinness";
    case ErrorCode::range: return "range";
    case ErrorCode::unknown_id: return "id";
    case ErrorCode::root: return "root";
    case ErrorCode::connectivity: return "connectivity";
    case ErrorCode::weight: return "weight";
    case ErrorCode::open_loop: return "open-loop";
    case ErrorCode::path: return "path";
    case ErrorCode::degenerate_sample: return "degenerate-sample";
    case ErrorCode::missing_case: return "case";
    case ErrorCode::spec: return "spec";
  }
  return "unknown";
}

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::format: return "format";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::io: return "io";
    case ErrorCode::mode: return "mode";
    case ErrorCode::input: return "input";
    case ErrorCode::geometry: return "geometry";
    case ErrorCode::thinness: return "thinness";
    case ErrorCode::range: return "range";
    case ErrorCode::unknown_id: return "unknown_id";
    case ErrorCode::root: return "root";
    case ErrorCode::connectivity: return "connectivity";
    case ErrorCode::weight: return "weight";
    case ErrorCode::open_loop: return "open_loop";
    case ErrorCode::path: return "path";
    case ErrorCode::degenerate_sample: return "degenerate_sample";
    case ErrorCode::missing_case: return "missing_case";
    case ErrorCode::spec: return "spec";
  }
  return "unknown";
}

}  // namespace corotk
