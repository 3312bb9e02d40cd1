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

#include "corotk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "corotk/components.hpp"
#include "corotk/error.hpp"
#include "corotk/skeleton.hpp"
#include "json.hpp"

namespace corotk {
namespace {

Metric ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

Metric harmonic(const Metric& p, const Metric& r) {
  if (!p || !r) return std::nullopt;
  if (*p + *r == 0.0) return 0.0;
  return 2.0 * *p * *r / (*p + *r);
}

std::string two_decimals(const Metric& m) {
  if (!m) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *m);
  return buf;
}

}  // namespace

const Metric& MetricSextet::operator[](std::size_t i) const {
  switch (i) {
    case 0: return dice;
    case 1: return recall;
    case 2: return precision;
    case 3: return cl_dice;
    case 4: return cl_recall;
    case 5: return cl_precision;
    default: throw Error(ErrorCode::range, "metric index");
  }
}

OverlapMetrics overlap_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  std::int64_t p = 0, g = 0, both = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    p += pred[n];
    g += gt[n];
    both += pred[n] & gt[n];
  }
  return {ratio(2 * both, p + g), ratio(both, g), ratio(both, p)};
}

CenterlineMetrics centerline_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> pred_skel,
                                     std::span<const std::uint8_t> gt, std::span<const std::uint8_t> gt_skel) {
  std::int64_t sp = 0, sp_in_g = 0, sg = 0, sg_in_p = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    sp += pred_skel[n];
    sp_in_g += pred_skel[n] & gt[n];
    sg += gt_skel[n];
    sg_in_p += gt_skel[n] & pred[n];
  }
  // Centerline scores need both trees; with either one empty all three are undefined.
  if (sp == 0 || sg == 0) return {};
  const Metric precision = ratio(sp_in_g, sp);
  const Metric recall = ratio(sg_in_p, sg);
  return {harmonic(precision, recall), recall, precision};
}

OverlapMetrics overlap_metrics(const Volume& pred, const Volume& gt) {
  require_same_grid(pred, gt);
  return overlap_metrics(foreground(pred), foreground(gt));
}

CenterlineMetrics centerline_metrics(const Volume& pred, const Volume& gt) {
  require_same_grid(pred, gt);
  const auto p = foreground(pred);
  const auto g = foreground(gt);
  const auto ps = skeletonize_bits(p, pred.dims());
  const auto gs = skeletonize_bits(g, gt.dims());
  return centerline_metrics(p, ps, g, gs);
}

std::string PostProcess::name() const {
  if (vol50 && pericardium) return "vol50+pericardium";
  if (vol50) return "vol50";
  if (pericardium) return "pericardium";
  return "none";
}

PostProcess PostProcess::parse(std::string_view text) {
  PostProcess p;
  std::string token;
  auto flush = [&] {
    if (token.empty() || token == "none") {
    } else if (token == "vol50") {
      p.vol50 = true;
    } else if (token == "pericardium") {
      p.pericardium = true;
    } else {
      throw Error(ErrorCode::input, "unknown post-processing step '" + token + "'");
    }
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == '+') flush();
    else token.push_back(c);
  }
  flush();
  return p;
}

Volume apply_postprocess(const Volume& pred, const Volume* pericardium, const PostProcess& flags) {
  Volume out = pred;
  if (flags.vol50) out = filter_small(out, flags.min_volume_mm3);
  if (flags.pericardium) {
    if (pericardium == nullptr) throw Error(ErrorCode::input, "pericardium mask required");
    out = filter_outside(out, *pericardium);
  }
  return out;
}

MetricSextet evaluate_case(const Volume& pred, const Volume& gt, const Volume* pericardium,
                           const PostProcess& flags) {
  require_same_grid(pred, gt);
  const Volume processed = apply_postprocess(pred, pericardium, flags);
  const auto ov = overlap_metrics(processed, gt);
  const auto cl = centerline_metrics(processed, gt);
  return {ov.dice, ov.recall, ov.precision, cl.cl_dice, cl.cl_recall, cl.cl_precision, flags.name()};
}

MetricSummary summarize_values(const std::vector<double>& values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  s.mean = mean;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.std_dev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

CohortSummary summarize(const std::vector<MetricSextet>& cohort) {
  if (cohort.empty()) throw Error(ErrorCode::input, "cannot summarize an empty cohort");
  CohortSummary out;
  for (std::size_t m = 0; m < 6; ++m) {
    std::vector<double> values;
    for (const auto& c : cohort)
      if (c[m]) values.push_back(*c[m]);
    out.metrics[m] = summarize_values(values);
  }
  return out;
}

std::string format_summary(const CohortSummary& summary) {
  std::ostringstream os;
  os << "metric        mean  median  std.dev\n";
  for (std::size_t m = 0; m < 6; ++m) {
    const auto& s = summary.metrics[m];
    char line[96];
    std::snprintf(line, sizeof line, "%-12s %5s %7s %8s\n", std::string(MetricSextet::kNames[m]).c_str(),
                  two_decimals(s.mean).c_str(), two_decimals(s.median).c_str(), two_decimals(s.std_dev).c_str());
    os << line;
  }
  return os.str();
}

std::string report_json(const std::vector<CaseResult>& cases, const CohortSummary& summary) {
  using nlohmann::json;
  auto value = [](const Metric& m) { return m ? json(*m) : json(nullptr); };
  json per_case = json::array();
  for (const auto& c : cases) {
    json row{{"case", c.case_id}};
    for (std::size_t i = 0; i < MetricSextet::kNames.size(); ++i)
      row[std::string(MetricSextet::kNames[i])] = value(c.metrics[i]);
    per_case.push_back(std::move(row));
  }
  json sum = json::object();
  for (std::size_t i = 0; i < MetricSextet::kNames.size(); ++i) {
    const auto& m = summary.metrics[i];
    sum[std::string(MetricSextet::kNames[i])] = {
        {"n", m.n}, {"mean", value(m.mean)}, {"median", value(m.median)}, {"std", value(m.std_dev)}};
  }
  const std::string variant = cases.empty() ? "none" : cases.front().metrics.variant;
  return json{{"variant", variant}, {"per_case", std::move(per_case)}, {"summary", std::move(sum)}}.dump(2);
}

}  // namespace corotk
