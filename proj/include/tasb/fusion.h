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

#ifndef TASB_FUSION_H_
#define TASB_FUSION_H_

#include <string_view>

#include "tasb/corpus.h"

namespace tasb {

enum class FusionMethod {
  // Per query, scores of each run are min-max normalized to [0, 1]; a passage
  // scores weight * a + (1 - weight) * b, with 0 for a run that missed it.
  // A run whose scores are all equal normalizes to 1.
  kMinMax,
  // weight / (k + rank_a) + (1 - weight) / (k + rank_b), missing terms 0.
  kReciprocalRank,
};

FusionMethod parse_fusion_method(std::string_view name);

inline constexpr double kDefaultFusionWeight = 0.5;
inline constexpr int kDefaultRrfK = 60;

// The fused run covers the union of both runs' queries and passages.
Run fuse_runs(const Run& run_a, const Run& run_b,
              double weight = kDefaultFusionWeight,
              FusionMethod method = FusionMethod::kMinMax,
              int rrf_k = kDefaultRrfK);

}  // namespace tasb

#endif  // TASB_FUSION_H_
