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

#include <doctest.h>

#include "tasb/kmeans.h"
#include "test_util.h"

namespace tasb {
namespace {

// Lowest objective over all 2-partitions of the rows, by enumeration.
double best_two_partition(const RowMatrixXd& points, unsigned* best_mask) {
  const auto n = static_cast<unsigned>(points.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
      int count = 0;
      for (unsigned i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
          mean += points.row(i);
          ++count;
        }
      }
      mean /= count;
      for (unsigned i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
          total += (points.row(i) - mean).squaredNorm();
        }
      }
    }
    if (total < best) {
      best = total;
      *best_mask = mask;
    }
  }
  return best;
}

TEST_CASE("k-means finds the optimal 2-partition of a 4-point toy") {
  RowMatrixXd points(4, 2);
  points << 0.0, 0.0, 0.0, 1.0, 10.0, 0.0, 10.0, 1.0;
  unsigned mask = 0;
  const double optimum = best_two_partition(points, &mask);
  CHECK(optimum == doctest::Approx(1.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto result = kmeans(points, 2, 100, seed);
    CHECK(result.objective() == doctest::Approx(optimum).epsilon(1e-12));
    CHECK(result.assignment[0] == result.assignment[1]);
    CHECK(result.assignment[2] == result.assignment[3]);
    CHECK(result.assignment[0] != result.assignment[2]);
    CHECK(result.converged);
  }
}

TEST_CASE("k-means objective never increases") {
  Rng rng(2024);
  for (int instance = 0; instance < 100; ++instance) {
    const auto n = static_cast<Eigen::Index>(20 + rng.uniform(80));
    const auto d = static_cast<Eigen::Index>(1 + rng.uniform(8));
    const int k = static_cast<int>(1 + rng.uniform(8));
    RowMatrixXd points(n, d);
    for (Eigen::Index i = 0; i < points.size(); ++i) {
      points.data()[i] = rng.normal() + 3.0 * static_cast<double>(i % 3);
    }
    const auto result = kmeans(points, k, 50, rng.next_u64());
    const auto& h = result.objective_history;
    REQUIRE_FALSE(h.empty());
    for (std::size_t i = 1; i < h.size(); ++i) {
      CHECK(h[i] <= h[i - 1] + 1e-9 * (1.0 + h[i - 1]));
    }
    // The reported assignment matches its centroids.
    CHECK(kmeans_objective(points, result.centroids, result.assignment) ==
          doctest::Approx(result.objective()));
  }
}

TEST_CASE("k-means repairs empty clusters and validates input") {
  RowMatrixXd points(5, 1);
  points << 0.0, 0.0, 0.0, 0.0, 1.0;
  const auto result = kmeans(points, 3, 10, 1);
  std::vector<int> sizes(3, 0);
  for (int c : result.assignment) ++sizes[c];
  for (int s : sizes) CHECK(s > 0);
  CHECK_THROWS_AS(kmeans(points, 6, 10, 1), Error);
  CHECK_THROWS_AS(kmeans(points, 0, 10, 1), Error);
  points(2, 0) = std::nan("");
  CHECK_THROWS_AS(kmeans(points, 2, 10, 1), Error);
}

TEST_CASE("k-means works in single precision") {
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> points(
      4, 1);
  points << 0.f, 1.f, 10.f, 11.f;
  const auto result = kmeans(points, 2, 20, 5);
  CHECK(result.objective() == doctest::Approx(1.0f));
}

TEST_CASE("default cluster count") {
  CHECK(default_cluster_count(1) == 1);
  CHECK(default_cluster_count(10) == 2);
  CHECK(default_cluster_count(400) == 2);
  CHECK(default_cluster_count(401) == 3);
  CHECK(default_cluster_count(2000) == 10);
}

TEST_CASE("query clustering groups topics and round-trips") {
  // Two topics with disjoint vocabularies.
  QueryStore queries;
  for (int i = 0; i < 10; ++i) {
    queries.add({"a" + std::to_string(i), {"apple", "pear", "w" + std::to_string(i)}});
    queries.add({"b" + std::to_string(i), {"engine", "wheel", "v" + std::to_string(i)}});
  }
  const StudentModel model = StudentModel::random(1024, 16, 9);
  const TopicClusters clusters = cluster_queries(model, queries, 2, 17);
  REQUIRE(clusters.num_clusters() == 2);
  const int a = *clusters.cluster_of("a0");
  const int b = *clusters.cluster_of("b0");
  CHECK(a != b);
  for (int i = 0; i < 10; ++i) {
    CHECK(*clusters.cluster_of("a" + std::to_string(i)) == a);
    CHECK(*clusters.cluster_of("b" + std::to_string(i)) == b);
  }
  CHECK_FALSE(clusters.cluster_of("zzz").has_value());

  testing::TempDir dir;
  write_clusters(clusters, dir / "c.bin");
  const TopicClusters loaded = read_clusters(dir / "c.bin");
  CHECK(loaded.centroids == clusters.centroids);
  CHECK(loaded.query_ids == clusters.query_ids);
  CHECK(loaded.assignment == clusters.assignment);
  CHECK(loaded.members == clusters.members);
  CHECK(*loaded.cluster_of("b3") == b);
}

}  // namespace
}  // namespace tasb
