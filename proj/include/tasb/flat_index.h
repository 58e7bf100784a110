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

// Exact maximum-inner-product search over an uncompressed matrix of passage
// vectors.

#ifndef TASB_FLAT_INDEX_H_
#define TASB_FLAT_INDEX_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tasb/common.h"
#include "tasb/corpus.h"
#include "tasb/encoder.h"

namespace tasb {

// Positions of the k best rows of `database` for `query` by inner product,
// best first. `tie_rank[i]` orders rows with equal scores (lower first).
template <typename DerivedDb, typename DerivedQ>
std::vector<Eigen::Index> top_k_inner_product(
    const Eigen::MatrixBase<DerivedDb>& database,
    const Eigen::MatrixBase<DerivedQ>& query, std::size_t k,
    std::span<const std::uint32_t> tie_rank,
    Eigen::Matrix<typename DerivedDb::Scalar, Eigen::Dynamic, 1>* scores_out =
        nullptr) {
  using Scalar = typename DerivedDb::Scalar;
  if (query.size() != database.cols()) {
    throw Error("search: query has dimension " + std::to_string(query.size()) +
                ", index has " + std::to_string(database.cols()));
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scores =
      database * query.derived().template cast<Scalar>();
  const auto n = static_cast<std::size_t>(database.rows());
  k = std::min(k, n);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto better = [&](Eigen::Index a, Eigen::Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return tie_rank[static_cast<std::size_t>(a)] <
           tie_rank[static_cast<std::size_t>(b)];
  };
  std::partial_sort(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), better);
  order.resize(k);
  if (scores_out != nullptr) *scores_out = scores;
  return order;
}

class DenseIndex {
 public:
  DenseIndex() = default;
  DenseIndex(RowMatrixXd vectors, std::vector<std::string> ids,
             std::uint64_t model_checksum);

  const RowMatrixXd& vectors() const { return vectors_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::uint64_t model_checksum() const { return model_checksum_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  double build_seconds = 0.0;

  // Exactly the k best passages, best first; k is clamped to size().
  std::vector<ScoredPassage> search(const Eigen::VectorXd& query,
                                    std::size_t k) const;

  // One ranking per query row. Each query goes through search(), so results
  // do not depend on `threads` (0 = hardware concurrency).
  std::vector<std::vector<ScoredPassage>> batch_search(
      const RowMatrixXd& queries, std::size_t k,
      unsigned threads = 0) const;

 private:
  RowMatrixXd vectors_;
  std::vector<std::string> ids_;
  std::vector<std::uint32_t> tie_rank_;  // position of each id in sorted order
  std::uint64_t model_checksum_ = 0;
};

DenseIndex build_index(const StudentModel& model,
                       const PassageStore& passages);

// "TASBINDX", version byte, count, d_emb, model checksum, ids, then vectors
// row-major as little-endian f64.
void write_index(const DenseIndex& index, const std::filesystem::path& path);
DenseIndex read_index(const std::filesystem::path& path);

// Retrieval for a whole query store as a TREC run.
Run search_queries(const StudentModel& model, const DenseIndex& index,
                   const QueryStore& queries, std::size_t k,
                   unsigned threads = 0);

struct PhaseTiming {
  double mean_ms = 0.0;
  double p99_ms = 0.0;
};

struct LatencyReport {
  std::size_t batch_size = 0;
  std::size_t repetitions = 0;
  std::size_t k = 0;
  std::size_t index_size = 0;
  PhaseTiming encode;
  PhaseTiming retrieve;
  PhaseTiming total;
};

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double percentile_nearest_rank(std::vector<double> values, double p);

// Times `repetitions` batches of `batch_size` queries (cycling through the
// store) split into query encoding and retrieval.
LatencyReport latency_report(const StudentModel& model, const DenseIndex& index,
                             const QueryStore& queries, std::size_t k,
                             std::size_t batch_size, std::size_t repetitions);

std::string format_latency_tsv(std::span<const LatencyReport> reports);

}  // namespace tasb

#endif  // TASB_FLAT_INDEX_H_
