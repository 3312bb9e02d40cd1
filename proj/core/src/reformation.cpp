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

#include "corotk/reformation.hpp"

#include <algorithm>
#include <cmath>

#include "corotk/error.hpp"
#include "corotk/resample.hpp"

namespace corotk {
namespace {

struct Arclength {
  std::vector<Vec3> points;
  std::vector<double> cum;

  explicit Arclength(const std::vector<Vec3>& path) {
    for (const auto& p : path) {
      if (!points.empty() && distance(points.back(), p) == 0.0) continue;
      points.push_back(p);
    }
    cum.assign(1, 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) cum.push_back(cum.back() + distance(points[i - 1], points[i]));
    if (points.size() < 2 || !(cum.back() > 0.0)) throw Error(ErrorCode::path, "path has zero length");
  }

  double length() const { return cum.back(); }

  Vec3 at(double s) const {
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    auto i = static_cast<std::size_t>(it - cum.begin());
    if (i >= points.size()) i = points.size() - 1;
    const double seg = cum[i] - cum[i - 1];
    return points[i - 1] + ((s - cum[i - 1]) / seg) * (points[i] - points[i - 1]);
  }
};

Vec3 initial_normal(Vec3 t) {
  // World axis least aligned with the tangent, orthogonalized.
  const Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  int best = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(t[a]) < std::abs(t[best])) best = a;
  return normalized(axes[best] - dot(axes[best], t) * t);
}

double sample_physical(const Volume& volume, Vec3 p) {
  return sample_trilinear(volume, volume.grid().to_index(p), kOutsideHu);
}

}  // namespace

double path_length(const std::vector<Vec3>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  return len;
}

std::vector<Frame> rotation_minimizing_frames(const std::vector<Vec3>& path, const std::vector<double>& arclengths,
                                              double smoothing_mm) {
  const Arclength arc(path);
  std::vector<Frame> frames;
  frames.reserve(arclengths.size());
  for (std::size_t i = 0; i < arclengths.size(); ++i) {
    const double s = arclengths[i];
    Frame f;
    f.point = arc.at(s);
    const double lo = std::max(0.0, s - smoothing_mm), hi = std::min(arc.length(), s + smoothing_mm);
    f.tangent = normalized(arc.at(hi) - arc.at(lo));
    if (frames.empty()) {
      f.normal = initial_normal(f.tangent);
    } else {
      // Double reflection (Wang et al. 2008).
      const Frame& prev = frames.back();
      const Vec3 v1 = f.point - prev.point;
      const double c1 = dot(v1, v1);
      Vec3 r = prev.normal, t = prev.tangent;
      if (c1 > 0.0) {
        r = r - (2.0 / c1) * dot(v1, r) * v1;
        t = t - (2.0 / c1) * dot(v1, t) * v1;
      }
      const Vec3 v2 = f.tangent - t;
      const double c2 = dot(v2, v2);
      if (c2 > 0.0) r = r - (2.0 / c2) * dot(v2, r) * v2;
      // Re-orthonormalize against drift.
      f.normal = normalized(r - dot(r, f.tangent) * f.tangent);
    }
    f.binormal = cross(f.tangent, f.normal);
    frames.push_back(f);
  }
  return frames;
}

CprImage cpr(const Volume& volume, const std::vector<Vec3>& path, double half_width_mm, double ds, double dt) {
  if (!(ds > 0.0) || !(dt > 0.0) || !(half_width_mm >= 0.0))
    throw Error(ErrorCode::input, "CPR sampling steps must be positive");
  const Arclength arc(path);
  CprImage img;
  img.ds = ds;
  img.dt = dt;
  img.half_width = half_width_mm;
  img.rows = static_cast<std::int64_t>(std::floor(arc.length() / ds + 1e-9)) + 1;
  const auto m = static_cast<std::int64_t>(std::floor(half_width_mm / dt + 1e-9));
  img.cols = 2 * m + 1;
  std::vector<double> s(static_cast<std::size_t>(img.rows));
  for (std::int64_t i = 0; i < img.rows; ++i) s[static_cast<std::size_t>(i)] = std::min(arc.length(), static_cast<double>(i) * ds);
  img.frames = rotation_minimizing_frames(arc.points, s);
  img.pixels.resize(static_cast<std::size_t>(img.rows * img.cols));
  for (std::int64_t i = 0; i < img.rows; ++i) {
    const Frame& f = img.frames[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < img.cols; ++j) {
      const double offset = static_cast<double>(j - m) * dt;
      img.pixels[static_cast<std::size_t>(i * img.cols + j)] = sample_physical(volume, f.point + offset * f.normal);
    }
  }
  return img;
}

PlaneImage short_axis_cut(const Volume& volume, const std::vector<Vec3>& path, double s_mm, double half_width_mm,
                          double dt) {
  if (!(dt > 0.0) || !(half_width_mm >= 0.0)) throw Error(ErrorCode::input, "sampling step must be positive");
  const Arclength arc(path);
  if (!(s_mm >= 0.0 && s_mm <= arc.length())) throw Error(ErrorCode::range, "arclength outside [0, length]");
  // Carry the frame from the start in steps of at most 0.25 mm so it agrees with cpr().
  const auto steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(s_mm / 0.25)));
  std::vector<double> s;
  for (std::int64_t k = 0; k <= steps; ++k) s.push_back(s_mm * static_cast<double>(k) / static_cast<double>(steps));
  const Frame f = rotation_minimizing_frames(arc.points, s).back();

  PlaneImage img;
  const auto m = static_cast<std::int64_t>(std::floor(half_width_mm / dt + 1e-9));
  img.size = 2 * m + 1;
  img.frame = f;
  img.pixels.resize(static_cast<std::size_t>(img.size * img.size));
  for (std::int64_t r = 0; r < img.size; ++r)
    for (std::int64_t c = 0; c < img.size; ++c) {
      const Vec3 p = f.point + (static_cast<double>(c - m) * dt) * f.normal + (static_cast<double>(r - m) * dt) * f.binormal;
      img.pixels[static_cast<std::size_t>(r * img.size + c)] = sample_physical(volume, p);
    }
  return img;
}

}  // namespace corotk
