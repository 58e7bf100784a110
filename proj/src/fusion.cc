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

#include "tasb/fusion.h"

#include <algorithm>
#include <map>
#include <set>

namespace tasb {
namespace {

std::map<std::string, double> normalized(const std::vector<ScoredPassage>* ranking,
                                         FusionMethod method, int rrf_k) {
  std::map<std::string, double> out;
  if (ranking == nullptr || ranking->empty()) return out;
  if (method == FusionMethod::kReciprocalRank) {
    for (std::size_t r = 0; r < ranking->size(); ++r) {
      out[(*ranking)[r].passage_id] =
          1.0 / static_cast<double>(rrf_k + static_cast<int>(r) + 1);
    }
    return out;
  }
  double lo = ranking->front().score;
  double hi = lo;
  for (const auto& sp : *ranking) {
    lo = std::min(lo, sp.score);
    hi = std::max(hi, sp.score);
  }
  for (const auto& sp : *ranking) {
    out[sp.passage_id] = hi > lo ? (sp.score - lo) / (hi - lo) : 1.0;
  }
  return out;
}

}  // namespace

FusionMethod parse_fusion_method(std::string_view name) {
  if (name == "minmax") return FusionMethod::kMinMax;
  if (name == "rrf") return FusionMethod::kReciprocalRank;
  throw Error("unknown fusion method '" + std::string(name) +
              "' (expected minmax or rrf)");
}

Run fuse_runs(const Run& run_a, const Run& run_b, double weight,
              FusionMethod method, int rrf_k) {
  if (weight < 0.0 || weight > 1.0) {
    throw Error("fusion weight must lie in [0, 1]");
  }
  std::set<std::string> qids;
  for (const auto& [qid, r] : run_a.all()) qids.insert(qid);
  for (const auto& [qid, r] : run_b.all()) qids.insert(qid);

  Run fused;
  for (const std::string& qid : qids) {
    const auto a = normalized(run_a.find(qid), method, rrf_k);
    const auto b = normalized(run_b.find(qid), method, rrf_k);
    std::map<std::string, double> combined;
    for (const auto& [pid, s] : a) combined[pid] += weight * s;
    for (const auto& [pid, s] : b) combined[pid] += (1.0 - weight) * s;
    std::vector<ScoredPassage> ranking;
    ranking.reserve(combined.size());
    for (const auto& [pid, s] : combined) ranking.push_back({pid, s});
    fused.set(qid, std::move(ranking));
  }
  return fused;
}

}  // namespace tasb
