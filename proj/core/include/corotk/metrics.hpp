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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corotk/volume.hpp"

namespace corotk {

// std::nullopt is the undefined marker: the metric's denominator was zero.
using Metric = std::optional<double>;

struct OverlapMetrics {
  Metric dice;
  Metric recall;
  Metric precision;
};

// All three are undefined when either skeleton is empty.
struct CenterlineMetrics {
  Metric cl_dice;
  Metric cl_recall;
  Metric cl_precision;
};

struct MetricSextet {
  Metric dice;
  Metric recall;
  Metric precision;
  Metric cl_dice;
  Metric cl_recall;
  Metric cl_precision;
  std::string variant = "none";

  static constexpr std::array<std::string_view, 6> kNames{"dice", "recall", "precision",
                                                          "cl_dice", "cl_recall", "cl_precision"};
  const Metric& operator[](std::size_t i) const;
};

OverlapMetrics overlap_metrics(const Volume& pred, const Volume& gt);
CenterlineMetrics centerline_metrics(const Volume& pred, const Volume& gt);

// Same quantities from raw buffers and precomputed skeletons.
OverlapMetrics overlap_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);
CenterlineMetrics centerline_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> pred_skel,
                                     std::span<const std::uint8_t> gt, std::span<const std::uint8_t> gt_skel);

struct PostProcess {
  bool vol50 = false;
  bool pericardium = false;
  double min_volume_mm3 = 50.0;

  // "none", "vol50", "pericardium" or "vol50+pericardium".
  std::string name() const;
  // Accepts "none", "" or a comma/plus separated list of vol50 and pericardium.
  static PostProcess parse(std::string_view text);
};

// Applies the selected component filters to `pred`, then scores it against `gt`.
MetricSextet evaluate_case(const Volume& pred, const Volume& gt, const Volume* pericardium,
                           const PostProcess& flags);
Volume apply_postprocess(const Volume& pred, const Volume* pericardium, const PostProcess& flags);

struct MetricSummary {
  std::size_t n = 0;  // defined entries used
  Metric mean;
  Metric median;
  Metric std_dev;  // sample (n - 1) denominator; undefined for n < 2
};

struct CohortSummary {
  std::array<MetricSummary, 6> metrics;  // MetricSextet::kNames order
};

MetricSummary summarize_values(const std::vector<double>& values);
// Undefined entries are skipped per metric. Throws Error(input) on an empty cohort.
CohortSummary summarize(const std::vector<MetricSextet>& cohort);

// Table-style text rendering, two decimals.
std::string format_summary(const CohortSummary& summary);

struct CaseResult {
  std::string case_id;
  MetricSextet metrics;
};

// {"variant", "per_case": [{"case", <metric>...}], "summary": {<metric>: {n, mean, median, std}}}
// with null for undefined values.
std::string report_json(const std::vector<CaseResult>& cases, const CohortSummary& summary);

}  // namespace corotk
