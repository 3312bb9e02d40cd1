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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corotk {

enum class TestMethod { exact, normal_approx };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::exact;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

// Largest combined sample size for which the exact Mann-Whitney null is enumerated.
inline constexpr std::size_t kMannWhitneyExactMax = 16;
// Largest number of nonzero pairs for which the exact signed-rank null is enumerated.
inline constexpr std::size_t kWilcoxonExactMax = 20;

// Two-sided Mann-Whitney U. U = min(U_a, U_b) with midranks. Exact null when
// n1 + n2 <= 16 and there are no ties, otherwise the tie-corrected normal
// approximation with a 0.5 continuity correction.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Two-sided Wilcoxon signed-rank on paired samples. Zero differences are dropped;
// W = min(W+, W-). Exact null when at most 20 pairs remain and the |differences| are
// untied, normal approximation (tie + continuity corrected) otherwise.
// n1 and n2 both report the number of nonzero pairs used.
TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

// Midranks (1-based) of `values`, ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

std::string_view to_string(TestMethod method);
std::string to_json(const TestResult& result);

}  // namespace corotk
