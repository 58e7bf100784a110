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

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace tasb {

DenseIndex::DenseIndex(RowMatrixXd vectors, std::vector<std::string> ids,
                       std::uint64_t model_checksum)
    : vectors_(std::move(vectors)),
      ids_(std::move(ids)),
      model_checksum_(model_checksum) {
  if (static_cast<std::size_t>(vectors_.rows()) != ids_.size()) {
    throw Error("index: vector count does not match id count");
  }
  if (!vectors_.allFinite()) throw Error("index: non-finite passage vector");
  std::vector<std::uint32_t> by_id(ids_.size());
  std::iota(by_id.begin(), by_id.end(), 0u);
  std::sort(by_id.begin(), by_id.end(),
            [&](std::uint32_t a, std::uint32_t b) { return ids_[a] < ids_[b]; });
  tie_rank_.resize(ids_.size());
  for (std::uint32_t r = 0; r < by_id.size(); ++r) tie_rank_[by_id[r]] = r;
}

std::vector<ScoredPassage> DenseIndex::search(const Eigen::VectorXd& query,
                                              std::size_t k) const {
  if (k < 1) throw Error("search: k must be >= 1");
  Eigen::VectorXd scores;
  const auto top = top_k_inner_product(vectors_, query, k, tie_rank_, &scores);
  std::vector<ScoredPassage> out;
  out.reserve(top.size());
  for (Eigen::Index row : top) {
    out.push_back({ids_[static_cast<std::size_t>(row)], scores[row]});
  }
  return out;
}

std::vector<std::vector<ScoredPassage>> DenseIndex::batch_search(
    const RowMatrixXd& queries, std::size_t k, unsigned threads) const {
  const auto n = static_cast<std::size_t>(queries.rows());
  std::vector<std::vector<ScoredPassage>> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  auto work = [&](std::size_t begin) {
    for (std::size_t i = begin; i < n; i += threads) {
      out[i] = search(queries.row(static_cast<Eigen::Index>(i)).transpose(), k);
    }
  };
  if (threads <= 1) {
    work(0);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        work(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

DenseIndex build_index(const StudentModel& model,
                       const PassageStore& passages) {
  if (passages.empty()) throw Error("cannot build an index over no passages");
  const auto start = std::chrono::steady_clock::now();
  RowMatrixXd vectors(static_cast<Eigen::Index>(passages.size()),
                      model.weights.cols());
  std::vector<std::string> ids;
  ids.reserve(passages.size());
  Eigen::Index row = 0;
  for (const Passage& p : passages) {
    Eigen::VectorXd v;
    try {
      v = student_encode_tokens(model, p.tokens);
    } catch (const Error& e) {
      throw Error("encoding passage '" + p.id + "' failed: " + e.what());
    }
    if (!v.allFinite()) throw Error("passage '" + p.id + "' encodes to non-finite values");
    vectors.row(row++) = v.transpose();
    ids.push_back(p.id);
  }
  DenseIndex index(std::move(vectors), std::move(ids), model_checksum(model));
  index.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return index;
}

namespace {
constexpr std::uint8_t kIndexVersion = 1;
}  // namespace

void write_index(const DenseIndex& index, const std::filesystem::path& path) {
  write_file_atomic(
      path,
      [&](std::ostream& out) {
        out.write("TASBINDX", 8);
        write_u8(out, kIndexVersion);
        write_u64(out, index.size());
        write_u64(out, index.dim());
        write_u64(out, index.model_checksum());
        for (const auto& id : index.ids()) write_string(out, id);
        const RowMatrixXd& v = index.vectors();
        for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(out, v.data()[i]);
      },
      /*binary=*/true);
}

DenseIndex read_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index " + path.string());
  expect_magic(in, "TASBINDX", path);
  if (read_u8(in) != kIndexVersion) {
    throw Error(path.string() + ": unsupported index version");
  }
  const std::uint64_t count = read_u64(in);
  const std::uint64_t dim = read_u64(in);
  const std::uint64_t checksum = read_u64(in);
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) ids.push_back(read_string(in));
  RowMatrixXd v(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = read_f64(in);
  return DenseIndex(std::move(v), std::move(ids), checksum);
}

Run search_queries(const StudentModel& model, const DenseIndex& index,
                   const QueryStore& queries, std::size_t k,
                   unsigned threads) {
  const RowMatrixXd encoded = student_encode_all(model, queries);
  const auto results = index.batch_search(encoded, k, threads);
  Run run;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    run.set_ranked(queries[i].id, results[i]);
  }
  return run;
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw Error("percentile of an empty sample");
  if (p <= 0.0 || p > 100.0) throw Error("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

LatencyReport latency_report(const StudentModel& model, const DenseIndex& index,
                             const QueryStore& queries, std::size_t k,
                             std::size_t batch_size, std::size_t repetitions) {
  if (queries.empty()) throw Error("latency report needs queries");
  if (batch_size < 1 || repetitions < 1) {
    throw Error("latency report needs batch size and repetitions >= 1");
  }
  using Clock = std::chrono::steady_clock;
  auto ms = [](Clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };
  std::vector<double> encode, retrieve, total;
  std::size_t cursor = 0;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto t0 = Clock::now();
    RowMatrixXd encoded(static_cast<Eigen::Index>(batch_size),
                        model.weights.cols());
    for (std::size_t i = 0; i < batch_size; ++i) {
      const Query& q = queries[cursor];
      cursor = (cursor + 1) % queries.size();
      encoded.row(static_cast<Eigen::Index>(i)) =
          student_encode_tokens(model, q.tokens).transpose();
    }
    const auto t1 = Clock::now();
    const auto results = index.batch_search(encoded, k, 1);
    const auto t2 = Clock::now();
    if (results.size() != batch_size) throw Error("latency run lost queries");
    encode.push_back(ms(t1 - t0));
    retrieve.push_back(ms(t2 - t1));
    total.push_back(ms(t2 - t0));
  }
  auto summarize = [](const std::vector<double>& v) {
    PhaseTiming t;
    double sum = 0.0;
    for (double x : v) sum += x;
    t.mean_ms = sum / static_cast<double>(v.size());
    t.p99_ms = percentile_nearest_rank(v, 99.0);
    return t;
  };
  LatencyReport report;
  report.batch_size = batch_size;
  report.repetitions = repetitions;
  report.k = k;
  report.index_size = index.size();
  report.encode = summarize(encode);
  report.retrieve = summarize(retrieve);
  report.total = summarize(total);
  return report;
}

std::string format_latency_tsv(std::span<const LatencyReport> reports) {
  std::ostringstream out;
  out << "batch_size\tencode_avg_ms\tencode_p99_ms\tretrieve_avg_ms\t"
         "retrieve_p99_ms\ttotal_avg_ms\ttotal_p99_ms\tk\tpassages\t"
         "repetitions\n";
  for (const LatencyReport& r : reports) {
    out << r.batch_size << '\t' << format_fixed(r.encode.mean_ms, 3) << '\t'
        << format_fixed(r.encode.p99_ms, 3) << '\t'
        << format_fixed(r.retrieve.mean_ms, 3) << '\t'
        << format_fixed(r.retrieve.p99_ms, 3) << '\t'
        << format_fixed(r.total.mean_ms, 3) << '\t'
        << format_fixed(r.total.p99_ms, 3) << '\t' << r.k << '\t'
        << r.index_size << '\t' << r.repetitions << '\n';
  }
  return out.str();
}

}  // namespace tasb
