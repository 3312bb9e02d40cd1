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

#include "corotk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corotk/error.hpp"
#include "json.hpp"

namespace corotk {
namespace {

struct RankInfo {
  std::vector<double> ranks;
  double tie_term = 0.0;  // sum over tie groups of t^3 - t
  bool ties = false;
};

RankInfo rank_with_ties(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  RankInfo info;
  info.ranks.assign(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) info.ranks[order[k]] = rank;
    const auto t = static_cast<double>(j - i + 1);
    if (t > 1.0) {
      info.ties = true;
      info.tie_term += t * t * t - t;
    }
    i = j + 1;
  }
  return info;
}

double two_sided_normal(double statistic, double mean, double variance) {
  if (!(variance > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(statistic - mean) - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

// Number of size-k subsets of {1..n} for every possible rank sum.
std::vector<double> subset_sum_counts(std::size_t n, std::size_t k) {
  const std::size_t max_sum = n * (n + 1) / 2;
  // counts[j][s]: subsets of size j with sum s.
  std::vector<std::vector<double>> counts(k + 1, std::vector<double>(max_sum + 1, 0.0));
  counts[0][0] = 1.0;
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t j = std::min(k, r); j >= 1; --j)
      for (std::size_t s = max_sum; s >= r; --s) counts[j][s] += counts[j - 1][s - r];
  return counts[k];
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) { return rank_with_ties(values).ranks; }

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::input, "Mann-Whitney needs two nonempty samples");
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const RankInfo r = rank_with_ties(all);
  const auto n1 = static_cast<double>(a.size());
  const auto n2 = static_cast<double>(b.size());
  const double rank_sum_a = std::accumulate(r.ranks.begin(), r.ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u_a = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  const double u = std::min(u_a, n1 * n2 - u_a);

  TestResult out;
  out.statistic = u;
  out.n1 = a.size();
  out.n2 = b.size();
  if (all.size() <= kMannWhitneyExactMax && !r.ties) {
    // U_a = rank sum of a minus its minimum; enumerate rank sums of a.
    const auto counts = subset_sum_counts(all.size(), a.size());
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const std::size_t min_sum = a.size() * (a.size() + 1) / 2;
    const auto u_obs = static_cast<std::size_t>(u);
    double tail = 0.0;
    for (std::size_t s = min_sum; s <= min_sum + u_obs && s < counts.size(); ++s) tail += counts[s];
    out.method = TestMethod::exact;
    out.p_value = std::min(1.0, 2.0 * tail / total);
    return out;
  }
  const double n = n1 + n2;
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));
  out.method = TestMethod::normal_approx;
  out.p_value = two_sided_normal(u, n1 * n2 / 2.0, variance);
  return out;
}

TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::input, "Wilcoxon needs paired samples of equal length");
  std::vector<double> magnitude;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d == 0.0) continue;
    magnitude.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  if (magnitude.empty()) throw Error(ErrorCode::degenerate_sample, "all paired differences are zero");

  const RankInfo r = rank_with_ties(magnitude);
  const std::size_t n = magnitude.size();
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (positive[i]) w_plus += r.ranks[i];
  const double nn = static_cast<double>(n);
  const double w_total = nn * (nn + 1.0) / 2.0;
  const double w = std::min(w_plus, w_total - w_plus);

  TestResult out;
  out.statistic = w;
  out.n1 = n;
  out.n2 = n;
  if (n <= kWilcoxonExactMax && !r.ties) {
    // Sign assignments <-> subsets of {1..n}; count by sum of the positive ranks.
    const auto max_sum = static_cast<std::size_t>(w_total);
    std::vector<double> counts(max_sum + 1, 0.0);
    counts[0] = 1.0;
    for (std::size_t rank = 1; rank <= n; ++rank)
      for (std::size_t s = max_sum; s >= rank; --s) counts[s] += counts[s - rank];
    double tail = 0.0;
    for (std::size_t s = 0; s <= static_cast<std::size_t>(w); ++s) tail += counts[s];
    out.method = TestMethod::exact;
    out.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
    return out;
  }
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - r.tie_term / 48.0;
  out.method = TestMethod::normal_approx;
  out.p_value = two_sided_normal(w, nn * (nn + 1.0) / 4.0, variance);
  return out;
}

std::string_view to_string(TestMethod method) {
  return method == TestMethod::exact ? "exact" : "normal_approx";
}

std::string to_json(const TestResult& result) {
  nlohmann::json j{{"statistic", result.statistic},
                   {"p_value", result.p_value},
                   {"method", std::string(to_string(result.method))},
                   {"n1", result.n1},
                   {"n2", result.n2}};
  return j.dump();
}

}  // namespace corotk
