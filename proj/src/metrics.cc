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

#include "tasb/metrics.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "tasb/common.h"

namespace tasb {
namespace {

using PerQuery = std::function<double(std::span<const ScoredPassage>,
                                      const std::map<std::string, int>&)>;

// Shared query bookkeeping: which queries count and what an absent ranking
// scores.
MetricReport evaluate(const Run& run, const Qrels& qrels, std::string metric,
                      std::size_t cutoff, int binarization, int min_grade,
                      const PerQuery& fn) {
  if (cutoff < 1) throw Error("metric cutoff must be >= 1");
  MetricReport report;
  report.metric = std::move(metric);
  report.cutoff = cutoff;
  report.binarization = binarization;

  std::size_t unjudged = 0;
  for (const auto& [qid, ranking] : run.all()) {
    if (qrels.judgments(qid) == nullptr) ++unjudged;
  }
  if (unjudged > 0) {
    log_warning(std::to_string(unjudged) +
                " run queries have no judgments and were skipped");
  }

  for (const auto& [qid, judged] : qrels.all()) {
    const bool has_relevant =
        std::any_of(judged.begin(), judged.end(),
                    [&](const auto& kv) { return kv.second >= min_grade; });
    if (!has_relevant) continue;
    const auto* ranking = run.find(qid);
    report.per_query[qid] =
        ranking == nullptr ? 0.0 : fn(*ranking, judged);
  }
  double sum = 0.0;
  for (const auto& [qid, v] : report.per_query) sum += v;
  report.mean = report.per_query.empty()
                    ? 0.0
                    : sum / static_cast<double>(report.per_query.size());
  return report;
}

int grade_in(const std::map<std::string, int>& judged, const std::string& pid) {
  auto it = judged.find(pid);
  return it == judged.end() ? 0 : it->second;
}

std::string cutoff_name(std::size_t cutoff) {
  return cutoff == kUnboundedCutoff ? "all" : std::to_string(cutoff);
}

}  // namespace

double ndcg_of_ranking(std::span<const ScoredPassage> ranking,
                       const std::map<std::string, int>& judged,
                       std::size_t cutoff) {
  double dcg = 0.0;
  const std::size_t depth = std::min(cutoff, ranking.size());
  for (std::size_t r = 0; r < depth; ++r) {
    const int g = grade_in(judged, ranking[r].passage_id);
    if (g > 0) dcg += g / std::log2(static_cast<double>(r) + 2.0);
  }
  std::vector<int> ideal;
  for (const auto& [pid, g] : judged) {
    if (g > 0) ideal.push_back(g);
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(cutoff, ideal.size()); ++r) {
    idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

MetricReport ndcg_at(const Run& run, const Qrels& qrels, std::size_t cutoff) {
  return evaluate(run, qrels, "ndcg_cut_" + cutoff_name(cutoff), cutoff, 0, 1,
                  [cutoff](auto ranking, const auto& judged) {
                    return ndcg_of_ranking(ranking, judged, cutoff);
                  });
}

MetricReport mrr_at(const Run& run, const Qrels& qrels, std::size_t cutoff,
                    int binarization) {
  return evaluate(
      run, qrels, "recip_rank_cut_" + cutoff_name(cutoff), cutoff,
      binarization, binarization,
      [cutoff, binarization](auto ranking, const auto& judged) {
        const std::size_t depth = std::min(cutoff, ranking.size());
        for (std::size_t r = 0; r < depth; ++r) {
          if (grade_in(judged, ranking[r].passage_id) >= binarization) {
            return 1.0 / static_cast<double>(r + 1);
          }
        }
        return 0.0;
      });
}

MetricReport recall_at(const Run& run, const Qrels& qrels, std::size_t cutoff,
                       int binarization) {
  return evaluate(
      run, qrels, "recall_" + cutoff_name(cutoff), cutoff, binarization,
      binarization, [cutoff, binarization](auto ranking, const auto& judged) {
        std::size_t relevant = 0;
        for (const auto& [pid, g] : judged) {
          if (g >= binarization) ++relevant;
        }
        std::size_t found = 0;
        const std::size_t depth = std::min(cutoff, ranking.size());
        for (std::size_t r = 0; r < depth; ++r) {
          if (grade_in(judged, ranking[r].passage_id) >= binarization) ++found;
        }
        return static_cast<double>(found) / static_cast<double>(relevant);
      });
}

std::vector<std::pair<std::size_t, double>> recall_curve(
    const Run& run, const Qrels& qrels, std::span<const std::size_t> cutoffs,
    int binarization) {
  std::vector<std::pair<std::size_t, double>> curve;
  for (std::size_t c : cutoffs) {
    curve.emplace_back(c, recall_at(run, qrels, c, binarization).mean);
  }
  return curve;
}

void write_metric_report(const MetricReport& report,
                         const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "query_id\t" << report.metric << '\n';
    for (const auto& [qid, v] : report.per_query) {
      out << qid << '\t' << format_fixed(v) << '\n';
    }
    out << "all\t" << format_fixed(report.mean) << '\n';
  });
}

void write_recall_curve(std::span<const std::pair<std::size_t, double>> curve,
                        const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "cutoff\trecall\n";
    for (const auto& [c, r] : curve) {
      out << c << '\t' << format_fixed(r) << '\n';
    }
  });
}

}  // namespace tasb
