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

#include "tasb/clustering.h"

#include <algorithm>
#include <fstream>

#include "tasb/kmeans.h"

namespace tasb {

std::optional<int> TopicClusters::cluster_of(std::string_view query_id) const {
  auto it = lookup_.find(std::string(query_id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void TopicClusters::rebuild_index() {
  if (assignment.size() != query_ids.size()) {
    throw Error("cluster assignment does not match query list");
  }
  const auto k = static_cast<std::size_t>(centroids.rows());
  members.assign(k, {});
  lookup_.clear();
  for (std::size_t i = 0; i < query_ids.size(); ++i) {
    const int c = assignment[i];
    if (c < 0 || static_cast<std::size_t>(c) >= k) {
      throw Error("cluster index out of range for query " + query_ids[i]);
    }
    if (!lookup_.emplace(query_ids[i], c).second) {
      throw Error("query " + query_ids[i] + " assigned twice");
    }
    members[static_cast<std::size_t>(c)].push_back(query_ids[i]);
  }
}

int default_cluster_count(std::size_t num_queries) {
  const std::size_t k = std::max<std::size_t>(2, (num_queries + 199) / 200);
  return static_cast<int>(std::min(k, std::max<std::size_t>(num_queries, 1)));
}

TopicClusters cluster_queries(const StudentModel& model,
                              const QueryStore& queries, int k,
                              std::uint64_t seed, int max_iters) {
  const RowMatrixXd vectors = student_encode_all(model, queries);
  auto result = kmeans(vectors, k, max_iters, seed);
  TopicClusters clusters;
  clusters.centroids = std::move(result.centroids);
  clusters.assignment = std::move(result.assignment);
  clusters.seed = seed;
  clusters.query_ids.reserve(queries.size());
  for (const Query& q : queries) clusters.query_ids.push_back(q.id);
  clusters.rebuild_index();
  return clusters;
}

namespace {
constexpr std::uint8_t kClusterVersion = 1;
}  // namespace

void write_clusters(const TopicClusters& clusters,
                    const std::filesystem::path& path) {
  write_file_atomic(
      path,
      [&](std::ostream& out) {
        out.write("TASBCLUS", 8);
        write_u8(out, kClusterVersion);
        write_u64(out, static_cast<std::uint64_t>(clusters.centroids.rows()));
        write_u64(out, static_cast<std::uint64_t>(clusters.centroids.cols()));
        write_u64(out, clusters.seed);
        for (Eigen::Index i = 0; i < clusters.centroids.size(); ++i) {
          write_f64(out, clusters.centroids.data()[i]);
        }
        write_u64(out, clusters.query_ids.size());
        for (std::size_t i = 0; i < clusters.query_ids.size(); ++i) {
          write_string(out, clusters.query_ids[i]);
          write_u32(out, static_cast<std::uint32_t>(clusters.assignment[i]));
        }
      },
      /*binary=*/true);
}

TopicClusters read_clusters(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open cluster file " + path.string());
  expect_magic(in, "TASBCLUS", path);
  if (read_u8(in) != kClusterVersion) {
    throw Error(path.string() + ": unsupported cluster file version");
  }
  TopicClusters clusters;
  const auto k = static_cast<Eigen::Index>(read_u64(in));
  const auto d = static_cast<Eigen::Index>(read_u64(in));
  clusters.seed = read_u64(in);
  clusters.centroids.resize(k, d);
  for (Eigen::Index i = 0; i < clusters.centroids.size(); ++i) {
    clusters.centroids.data()[i] = read_f64(in);
  }
  const std::uint64_t count = read_u64(in);
  clusters.query_ids.reserve(count);
  clusters.assignment.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    clusters.query_ids.push_back(read_string(in));
    clusters.assignment.push_back(static_cast<int>(read_u32(in)));
  }
  clusters.rebuild_index();
  return clusters;
}

void write_cluster_tsv(const TopicClusters& clusters,
                       const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (std::size_t i = 0; i < clusters.query_ids.size(); ++i) {
      out << clusters.query_ids[i] << '\t' << clusters.assignment[i] << '\n';
    }
  });
}

}  // namespace tasb
