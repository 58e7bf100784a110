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

#ifndef TASB_CLUSTERING_H_
#define TASB_CLUSTERING_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tasb/common.h"
#include "tasb/corpus.h"
#include "tasb/encoder.h"

namespace tasb {

// Topic clusters over training queries.
struct TopicClusters {
  RowMatrixXd centroids;               // k x d_emb
  std::vector<std::string> query_ids;  // clustering order
  std::vector<int> assignment;         // aligned with query_ids
  std::vector<std::vector<std::string>> members;
  std::uint64_t seed = 0;

  std::size_t num_clusters() const { return members.size(); }
  std::optional<int> cluster_of(std::string_view query_id) const;

  // Rebuilds `members` and the id lookup from query_ids/assignment.
  void rebuild_index();

 private:
  std::unordered_map<std::string, int> lookup_;
};

// max(2, ceil(n / 200)), never above n.
int default_cluster_count(std::size_t num_queries);

inline constexpr int kDefaultKMeansIterations = 100;

// Encodes every query with `model` and runs k-means over the encodings.
TopicClusters cluster_queries(const StudentModel& model,
                              const QueryStore& queries, int k,
                              std::uint64_t seed,
                              int max_iters = kDefaultKMeansIterations);

// Binary file: "TASBCLUS", version byte, k, d_emb, seed, centroids (f64 LE,
// row-major), count, then (id, cluster) pairs.
void write_clusters(const TopicClusters& clusters,
                    const std::filesystem::path& path);
TopicClusters read_clusters(const std::filesystem::path& path);
// `query_id<TAB>cluster`, for inspection.
void write_cluster_tsv(const TopicClusters& clusters,
                       const std::filesystem::path& path);

}  // namespace tasb

#endif  // TASB_CLUSTERING_H_
