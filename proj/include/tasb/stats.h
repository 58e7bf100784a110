// Copyright 2026 The tasb Authors.
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

#ifndef TASB_STATS_H_
#define TASB_STATS_H_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tasb {

// Regularized incomplete beta I_x(a, b) (continued fraction).
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);

// Two-sided paired t-test over aligned per-query values. All-zero differences
// give p = 1; constant nonzero differences give p = 0.
double paired_t_test(std::span<const double> a, std::span<const double> b);

struct SeedInstance {
  std::string label;  // "A", "B", ...
  std::vector<std::pair<std::string, double>> metrics;  // same order for all
};

struct RobustnessSummary {
  std::vector<std::string> metric_names;
  std::vector<SeedInstance> instances;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation (n - 1)
};

RobustnessSummary robustness_report(std::span<const SeedInstance> instances);

// One row per instance, then `Avg.` and `StdDev` rows; three decimals, like a
// results table.
std::string format_robustness_tsv(const RobustnessSummary& summary);
void write_robustness_tsv(const RobustnessSummary& summary,
                          const std::filesystem::path& path);

// Pairwise p-values between systems (rows/cols in the given order).
std::vector<std::vector<double>> significance_matrix(
    std::span<const std::vector<double>> per_query_values);
void write_significance_tsv(std::span<const std::string> names,
                            const std::vector<std::vector<double>>& p_values,
                            const std::filesystem::path& path);

}  // namespace tasb

#endif  // TASB_STATS_H_
