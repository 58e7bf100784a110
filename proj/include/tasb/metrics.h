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

// Ranking metrics with trec_eval conventions.
//
// nDCG uses the raw grade as gain and 1/log2(rank + 1) as discount; the ideal
// ranking sorts all judged grades of the query. MRR and recall treat
// grade >= binarization as relevant. Queries without any relevant judgment
// are left out of the aggregate; judged queries missing from the run score 0;
// run queries without judgments are skipped with a warning.

#ifndef TASB_METRICS_H_
#define TASB_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tasb/corpus.h"

namespace tasb {

inline constexpr int kDefaultBinarization = 2;
inline constexpr std::size_t kUnboundedCutoff =
    std::numeric_limits<std::size_t>::max();

struct MetricReport {
  std::string metric;  // e.g. "ndcg_cut_10"
  std::size_t cutoff = 0;
  int binarization = 0;  // 0 for graded metrics
  std::map<std::string, double> per_query;
  double mean = 0.0;

  std::size_t num_queries() const { return per_query.size(); }
};

MetricReport ndcg_at(const Run& run, const Qrels& qrels, std::size_t cutoff);
MetricReport mrr_at(const Run& run, const Qrels& qrels, std::size_t cutoff,
                    int binarization = kDefaultBinarization);
MetricReport recall_at(const Run& run, const Qrels& qrels, std::size_t cutoff,
                       int binarization = kDefaultBinarization);

// Single-ranking forms used by the metrics above and by validation.
double ndcg_of_ranking(std::span<const ScoredPassage> ranking,
                       const std::map<std::string, int>& judged,
                       std::size_t cutoff);

// (cutoff, mean recall) for each cutoff, in the order given.
std::vector<std::pair<std::size_t, double>> recall_curve(
    const Run& run, const Qrels& qrels, std::span<const std::size_t> cutoffs,
    int binarization = kDefaultBinarization);

// `query_id<TAB>value` lines followed by `all<TAB>mean`.
void write_metric_report(const MetricReport& report,
                         const std::filesystem::path& path);
// `cutoff<TAB>recall`.
void write_recall_curve(std::span<const std::pair<std::size_t, double>> curve,
                        const std::filesystem::path& path);

}  // namespace tasb

#endif  // TASB_METRICS_H_
