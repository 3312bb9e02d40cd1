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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "corotk/window.hpp"

namespace corotk {

// 8-bit grayscale PNG of a single-plane image (depth must be 1).
std::vector<std::uint8_t> encode_png(const GrayImage& image);
void write_png(const GrayImage& image, const std::filesystem::path& path);
// Decodes an 8-bit grayscale PNG; used by tests and tools.
GrayImage decode_png(const std::vector<std::uint8_t>& bytes);

}  // namespace corotk
