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

#include "tasb/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "tasb/common.h"

namespace tasb {
namespace {

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw Error("incomplete beta: a, b must be > 0");
  if (x < 0.0 || x > 1.0) throw Error("incomplete beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (dof <= 0.0) throw Error("t distribution needs dof > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("paired t-test: samples differ in length");
  }
  const std::size_t n = a.size();
  if (n < 2) throw Error("paired t-test needs at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / std::sqrt(var / static_cast<double>(n));
  const double dof = static_cast<double>(n - 1);
  const double p = incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
  return std::clamp(p, 0.0, 1.0);
}

RobustnessSummary robustness_report(std::span<const SeedInstance> instances) {
  if (instances.size() < 2) {
    throw Error("robustness report needs at least two instances");
  }
  RobustnessSummary s;
  for (const auto& [name, v] : instances.front().metrics) {
    s.metric_names.push_back(name);
  }
  const std::size_t m = s.metric_names.size();
  for (const SeedInstance& inst : instances) {
    if (inst.metrics.size() != m) {
      throw Error("instance " + inst.label + " reports a different metric set");
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (inst.metrics[j].first != s.metric_names[j]) {
        throw Error("instance " + inst.label + " reports metrics out of order");
      }
    }
  }
  s.instances.assign(instances.begin(), instances.end());
  const double n = static_cast<double>(instances.size());
  s.mean.assign(m, 0.0);
  s.stddev.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (const SeedInstance& inst : instances) s.mean[j] += inst.metrics[j].second;
    s.mean[j] /= n;
    double ss = 0.0;
    for (const SeedInstance& inst : instances) {
      const double d = inst.metrics[j].second - s.mean[j];
      ss += d * d;
    }
    s.stddev[j] = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string format_robustness_tsv(const RobustnessSummary& summary) {
  std::ostringstream out;
  out << "Inst.";
  for (const auto& name : summary.metric_names) out << '\t' << name;
  out << '\n';
  for (const SeedInstance& inst : summary.instances) {
    out << inst.label;
    for (const auto& [name, v] : inst.metrics) out << '\t' << format_fixed(v, 3);
    out << '\n';
  }
  out << "Avg.";
  for (double v : summary.mean) out << '\t' << format_fixed(v, 3);
  out << "\nStdDev";
  for (double v : summary.stddev) out << '\t' << format_fixed(v, 3);
  out << '\n';
  return out.str();
}

void write_robustness_tsv(const RobustnessSummary& summary,
                          const std::filesystem::path& path) {
  const std::string text = format_robustness_tsv(summary);
  write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

std::vector<std::vector<double>> significance_matrix(
    std::span<const std::vector<double>> per_query_values) {
  const std::size_t k = per_query_values.size();
  std::vector<std::vector<double>> p(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      p[i][j] = p[j][i] =
          paired_t_test(per_query_values[i], per_query_values[j]);
    }
  }
  return p;
}

void write_significance_tsv(std::span<const std::string> names,
                            const std::vector<std::vector<double>>& p_values,
                            const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "system";
    for (const auto& n : names) out << '\t' << n;
    out << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << names[i];
      for (double p : p_values[i]) out << '\t' << format_fixed(p);
      out << '\n';
    }
  });
}

}  // namespace tasb
