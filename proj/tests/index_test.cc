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

#include "tasb/flat_index.h"

#include <doctest.h>

#include "test_util.h"

namespace tasb {
namespace {

// Full scan with a plain sort; ties by id.
std::vector<ScoredPassage> naive_search(const RowMatrixXd& db,
                                        const std::vector<std::string>& ids,
                                        const Eigen::VectorXd& q,
                                        std::size_t k) {
  std::vector<ScoredPassage> all;
  for (Eigen::Index i = 0; i < db.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < db.cols(); ++j) s += db(i, j) * q[j];
    all.push_back({ids[static_cast<std::size_t>(i)], s});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.passage_id < b.passage_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

TEST_CASE("search equals a naive scan with 1 and N threads") {
  Rng rng(10);
  const RowMatrixXd db = RowMatrixXd::NullaryExpr(2000, 16, [&] { return rng.normal(); });
  std::vector<std::string> ids;
  for (int i = 0; i < 2000; ++i) ids.push_back("p" + std::to_string(i));
  const DenseIndex index(db, ids, 0);
  const RowMatrixXd queries = RowMatrixXd::NullaryExpr(20, 16, [&] { return rng.normal(); });
  for (std::size_t k : {1u, 10u, 100u}) {
    const auto one = index.batch_search(queries, k, 1);
    const auto many = index.batch_search(queries, k, 4);
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      const auto expected = naive_search(db, ids, queries.row(q).transpose(), k);
      const auto& got = one[static_cast<std::size_t>(q)];
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(got[i].passage_id == expected[i].passage_id);
        CHECK(std::abs(got[i].score - expected[i].score) < 1e-12);
      }
      CHECK(many[static_cast<std::size_t>(q)] == got);
    }
  }
}

TEST_CASE("ties break by ascending passage id") {
  RowMatrixXd db(4, 2);
  db << 1, 0, 1, 0, 1, 0, 0, 1;
  const DenseIndex index(db, {"c", "a", "b", "z"}, 0);
  const auto top = index.search(Eigen::Vector2d(1.0, 0.0), 3);
  CHECK(top[0].passage_id == "a");
  CHECK(top[1].passage_id == "b");
  CHECK(top[2].passage_id == "c");
  CHECK(index.search(Eigen::Vector2d(1.0, 0.0), 99).size() == 4);
  CHECK_THROWS_AS(index.search(Eigen::Vector2d(1.0, 0.0), 0), Error);
  CHECK_THROWS_AS(index.search(Eigen::Vector3d(1.0, 0.0, 0.0), 1), Error);
}

TEST_CASE("index rejects bad input") {
  RowMatrixXd db(2, 2);
  db << 1, 0, std::nan(""), 1;
  CHECK_THROWS_AS(DenseIndex(db, {"a", "b"}, 0), Error);
  CHECK_THROWS_AS(DenseIndex(RowMatrixXd::Zero(2, 2), {"a"}, 0), Error);
  const StudentModel model = StudentModel::random(16, 4, 1);
  CHECK_THROWS_AS(build_index(model, PassageStore{}), Error);
}

TEST_CASE("index files round-trip and carry the model checksum") {
  PassageStore passages;
  passages.add({"p1", {"red", "apple"}});
  passages.add({"p2", {"green", "pear"}});
  passages.add({"p3", {"red", "car"}});
  const StudentModel model = StudentModel::random(256, 8, 4);
  const DenseIndex index = build_index(model, passages);
  CHECK(index.model_checksum() == model_checksum(model));
  testing::TempDir dir;
  write_index(index, dir / "i.bin");
  const DenseIndex loaded = read_index(dir / "i.bin");
  CHECK(loaded.vectors() == index.vectors());
  CHECK(loaded.ids() == index.ids());
  CHECK(loaded.model_checksum() == index.model_checksum());

  QueryStore queries;
  queries.add({"q1", {"red"}});
  queries.add({"q2", {"pear"}});
  const Run run = search_queries(model, loaded, queries, 2, 2);
  CHECK(run.num_queries() == 2);
  CHECK(run.find("q1")->size() == 2);
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  CHECK(percentile_nearest_rank(v, 99.0) == 99.0);
  CHECK(percentile_nearest_rank(v, 100.0) == 100.0);
  CHECK(percentile_nearest_rank(v, 50.0) == 50.0);
  CHECK(percentile_nearest_rank({3.0, 1.0, 2.0}, 99.0) == 3.0);
  CHECK(percentile_nearest_rank({7.0}, 1.0) == 7.0);
  CHECK_THROWS_AS(percentile_nearest_rank({}, 99.0), Error);
}

TEST_CASE("latency report covers every phase") {
  PassageStore passages;
  QueryStore queries;
  for (int i = 0; i < 50; ++i) {
    passages.add({"p" + std::to_string(i), {"w" + std::to_string(i)}});
    queries.add({"q" + std::to_string(i), {"w" + std::to_string(i % 7)}});
  }
  const StudentModel model = StudentModel::random(64, 8, 2);
  const DenseIndex index = build_index(model, passages);
  const LatencyReport r = latency_report(model, index, queries, 10, 4, 5);
  CHECK(r.batch_size == 4);
  CHECK(r.index_size == 50);
  CHECK(r.total.p99_ms >= r.total.mean_ms * 0.0);
  CHECK(r.total.mean_ms >= 0.0);
  const std::vector<LatencyReport> reports = {r};
  const std::string tsv = format_latency_tsv(reports);
  CHECK(tsv.rfind("batch_size\tencode_avg_ms", 0) == 0);
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 2);
}

}  // namespace
}  // namespace tasb
