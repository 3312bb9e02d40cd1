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

#include "corotk/window.hpp"

#include <cmath>

#include "corotk/error.hpp"

namespace corotk {

void WindowSpec::validate() const {
  if (!(low < high)) throw Error(ErrorCode::spec, "window low must be below high");
}

std::uint8_t window_value(double hu, const WindowSpec& w) {
  if (!(hu > w.low)) return 0;
  if (!(hu < w.high)) return 255;
  const double scaled = (hu - w.low) / (w.high - w.low) * 255.0;
  const double r = std::floor(scaled + 0.5);
  return static_cast<std::uint8_t>(r > 255.0 ? 255.0 : r);
}

GrayImage window_to_gray(const Volume& volume, const WindowSpec& w) {
  w.validate();
  if (volume.kind() != VoxelKind::intensity)
    throw Error(ErrorCode::input, "windowing applies to intensity volumes");
  const auto& d = volume.dims();
  GrayImage img{d[0], d[1], d[2], std::vector<std::uint8_t>(volume.size())};
  for (std::size_t n = 0; n < volume.size(); ++n) img.pixels[n] = window_value(volume[n], w);
  return img;
}

GrayImage window_slice(const Volume& volume, std::int64_t k, const WindowSpec& w) {
  w.validate();
  if (volume.kind() != VoxelKind::intensity)
    throw Error(ErrorCode::input, "windowing applies to intensity volumes");
  const auto& d = volume.dims();
  if (k < 0 || k >= d[2]) throw Error(ErrorCode::range, "slice index out of range");
  GrayImage img{d[0], d[1], 1, std::vector<std::uint8_t>(static_cast<std::size_t>(d[0] * d[1]))};
  const std::size_t base = volume.grid().linear(0, 0, k);
  for (std::size_t n = 0; n < img.pixels.size(); ++n) img.pixels[n] = window_value(volume[base + n], w);
  return img;
}

GrayImage window_pixels(const std::vector<double>& values, std::int64_t cols, std::int64_t rows,
                        const WindowSpec& w) {
  w.validate();
  if (static_cast<std::int64_t>(values.size()) != cols * rows)
    throw Error(ErrorCode::input, "pixel buffer does not match image size");
  GrayImage img{cols, rows, 1, std::vector<std::uint8_t>(values.size())};
  for (std::size_t n = 0; n < values.size(); ++n) img.pixels[n] = window_value(values[n], w);
  return img;
}

}  // namespace corotk
