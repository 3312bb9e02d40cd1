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
#include <string>

#include "corotk/mesh.hpp"
#include "corotk/nifti.hpp"
#include "phantoms.hpp"
#include "testing.hpp"

namespace synthetic {

// A 24 x 24 x 48 scan at 0.5 mm with a vertical tube from z = 2 mm to z = 20 mm.
struct CaseSpec {
  double tube_radius = 1.5;
  double tube_length = 18.0;
  bool ostium = true;
  float hu = 40.0f;
};

inline void write_case(const std::filesystem::path& dir, const CaseSpec& spec = {}) {
  std::filesystem::create_directories(dir);
  const corotk::Grid g = phantom::grid({24, 24, 48}, 0.5);
  std::vector<float> data(g.voxel_count(), spec.hu);
  for (std::size_t n = 0; n < data.size(); ++n) data[n] += static_cast<float>(g.unlinear(n)[2] % 5);
  corotk::write_volume(corotk::Volume(g, corotk::VoxelKind::intensity, data, corotk::DataType::int16), dir / "scan.nii.gz");
  const corotk::SurfaceMesh tube = phantom::tube_mesh({6.0, 6.0, 2.0}, spec.tube_length, spec.tube_radius, 16, 19);
  corotk::save_mesh(tube, dir / "tree.obj");
  if (spec.ostium) testing_support::spit(dir / "ostium.json", R"({"point": [6.0, 6.0, 1.0]})");
}

}  // namespace synthetic
