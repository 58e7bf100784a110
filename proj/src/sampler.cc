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

#include "tasb/sampler.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

namespace tasb {

std::string_view to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::kRandom:
      return "random";
    case SamplingStrategy::kTas:
      return "tas";
    case SamplingStrategy::kTasBalanced:
      return "tas-balanced";
  }
  return "?";
}

SamplingStrategy parse_sampling_strategy(std::string_view name) {
  if (name == "random") return SamplingStrategy::kRandom;
  if (name == "tas") return SamplingStrategy::kTas;
  if (name == "tas-balanced" || name == "tasb") {
    return SamplingStrategy::kTasBalanced;
  }
  throw Error("unknown sampling strategy '" + std::string(name) +
              "' (expected random, tas or tas-balanced)");
}

int margin_bin(double margin, double m_min, double width, int h) {
  if (width <= 0.0) return 0;
  const double pos = std::floor((margin - m_min) / width);
  if (pos < 0.0) return 0;
  if (pos >= static_cast<double>(h - 1)) return h - 1;
  return static_cast<int>(pos);
}

int BinnedPairs::bin_of(double margin) const {
  return margin_bin(margin, m_min, bin_width, num_bins);
}

BinnedPairs compute_margin_bins(std::span<const PassagePair> pairs, int h) {
  if (h < 1) throw Error("number of margin bins must be >= 1");
  if (pairs.empty()) throw Error("cannot bin an empty pair list");
  BinnedPairs binned;
  binned.num_bins = h;
  double lo = pairs.front().margin();
  double hi = lo;
  for (const PassagePair& p : pairs) {
    lo = std::min(lo, p.margin());
    hi = std::max(hi, p.margin());
  }
  binned.m_min = lo;
  binned.bin_width = (hi - lo) / h;
  binned.bins.assign(static_cast<std::size_t>(h), {});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    binned.bins[static_cast<std::size_t>(binned.bin_of(pairs[i].margin()))]
        .push_back(i);
  }
  for (int b = 0; b < h; ++b) {
    if (!binned.bins[static_cast<std::size_t>(b)].empty()) {
      binned.non_empty.push_back(b);
    }
  }
  return binned;
}

TrainingPool::TrainingPool(std::span<const TrainTriple> triples,
                           const TeacherScoreStore& scores, int num_bins)
    : num_bins_(num_bins) {
  if (num_bins < 1) throw Error("number of margin bins must be >= 1");
  for (const TrainTriple& t : triples) {
    auto [it, inserted] = positions_.emplace(t.query_id, query_ids_.size());
    if (inserted) {
      query_ids_.push_back(t.query_id);
      pairs_.emplace_back();
    }
    pairs_[it->second].push_back({t.pos_id, t.neg_id,
                                  scores.at(t.query_id, t.pos_id),
                                  scores.at(t.query_id, t.neg_id)});
  }
  bins_.reserve(pairs_.size());
  for (const auto& p : pairs_) bins_.push_back(compute_margin_bins(p, num_bins));
}

long long TrainingPool::position(std::string_view query_id) const {
  auto it = positions_.find(std::string(query_id));
  return it == positions_.end() ? -1 : static_cast<long long>(it->second);
}

namespace {

enum class PairChoice { kUniform, kBalanced };

BatchTuple draw_tuple(const TrainingPool& pool, std::size_t query,
                      PairChoice choice, Rng& rng) {
  const auto pairs = pool.pairs(query);
  const BinnedPairs& binned = pool.bins(query);
  std::size_t pick;
  if (choice == PairChoice::kBalanced) {
    const int bin = binned.non_empty[rng.uniform(binned.non_empty.size())];
    const auto& members = binned.bins[static_cast<std::size_t>(bin)];
    pick = members[rng.uniform(members.size())];
  } else {
    pick = rng.uniform(pairs.size());
  }
  const PassagePair& p = pairs[pick];
  BatchTuple t;
  t.query_id = pool.query_ids()[query];
  t.pos_id = p.pos_id;
  t.neg_id = p.neg_id;
  t.t_pos = p.t_pos;
  t.t_neg = p.t_neg;
  t.bin = binned.bin_of(p.margin());
  return t;
}

Batch sample_from_clusters(const TrainingPool& pool,
                           const ClusterIndex& clusters, std::size_t b,
                           std::size_t n, PairChoice choice, Rng& rng) {
  if (n < 1) throw Error("clusters per batch must be >= 1");
  if (b < n) {
    throw Error("batch size " + std::to_string(b) + " is smaller than the " +
                std::to_string(n) + " clusters per batch");
  }
  const std::size_t k = clusters.num_clusters();
  if (n > k) {
    throw Error("cannot draw " + std::to_string(n) + " clusters from " +
                std::to_string(k));
  }
  const std::size_t per_cluster = b / n;

  Batch batch;
  std::unordered_set<std::size_t> chosen;
  for (std::size_t slot = 0; slot < n; ++slot) {
    std::size_t cluster = 0;
    int attempts = 0;
    while (true) {
      if (attempts++ == kClusterResampleAttempts) {
        throw Error("no cluster with at least " + std::to_string(per_cluster) +
                    " queries after " +
                    std::to_string(kClusterResampleAttempts) + " draws");
      }
      cluster = rng.uniform(k);
      if (chosen.contains(cluster)) continue;
      if (clusters.members(cluster).size() >= per_cluster) break;
    }
    chosen.insert(cluster);
    batch.clusters.push_back(static_cast<int>(cluster));
    const auto members = clusters.members(cluster);
    for (std::size_t idx :
         sample_without_replacement(members.size(), per_cluster, rng)) {
      BatchTuple t = draw_tuple(pool, members[idx], choice, rng);
      t.cluster = static_cast<int>(cluster);
      batch.tuples.push_back(std::move(t));
    }
  }
  return batch;
}

}  // namespace

Batch sample_random_batch(const TrainingPool& pool, std::size_t b, Rng& rng) {
  if (b > pool.num_queries()) {
    throw Error("random batch of " + std::to_string(b) + " needs at least " +
                std::to_string(b) + " distinct queries, pool has " +
                std::to_string(pool.num_queries()));
  }
  Batch batch;
  batch.strategy = SamplingStrategy::kRandom;
  for (std::size_t q : sample_without_replacement(pool.num_queries(), b, rng)) {
    batch.tuples.push_back(draw_tuple(pool, q, PairChoice::kUniform, rng));
  }
  return batch;
}

ClusterIndex::ClusterIndex(const TopicClusters& clusters,
                           const TrainingPool& pool) {
  members_.resize(clusters.num_clusters());
  for (std::size_t c = 0; c < clusters.num_clusters(); ++c) {
    for (const std::string& qid : clusters.members[c]) {
      const long long pos = pool.position(qid);
      if (pos >= 0) members_[c].push_back(static_cast<std::size_t>(pos));
    }
  }
}

Batch sample_tas_batch(const TrainingPool& pool, const ClusterIndex& clusters,
                       std::size_t b, std::size_t n, Rng& rng) {
  Batch batch =
      sample_from_clusters(pool, clusters, b, n, PairChoice::kUniform, rng);
  batch.strategy = SamplingStrategy::kTas;
  return batch;
}

Batch sample_tas_balanced_batch(const TrainingPool& pool,
                                const ClusterIndex& clusters, std::size_t b,
                                std::size_t n, Rng& rng) {
  Batch batch =
      sample_from_clusters(pool, clusters, b, n, PairChoice::kBalanced, rng);
  batch.strategy = SamplingStrategy::kTasBalanced;
  return batch;
}

BatchSampler::BatchSampler(const TrainingPool& pool,
                           const TopicClusters* clusters, SamplerConfig config)
    : pool_(&pool), config_(config), rng_(config.seed) {
  if (config_.batch_size < 1) throw Error("batch size must be >= 1");
  if (config_.strategy != SamplingStrategy::kRandom) {
    if (clusters == nullptr) {
      throw Error(std::string(to_string(config_.strategy)) +
                  " sampling needs topic clusters");
    }
    clusters_.emplace(*clusters, pool);
  }
}

Batch BatchSampler::next() {
  Batch batch;
  switch (config_.strategy) {
    case SamplingStrategy::kRandom:
      batch = sample_random_batch(*pool_, config_.batch_size, rng_);
      break;
    case SamplingStrategy::kTas:
      batch = sample_tas_batch(*pool_, *clusters_, config_.batch_size,
                               config_.clusters_per_batch, rng_);
      break;
    case SamplingStrategy::kTasBalanced:
      batch = sample_tas_balanced_batch(*pool_, *clusters_, config_.batch_size,
                                        config_.clusters_per_batch, rng_);
      break;
  }
  batch.index = produced_++;
  return batch;
}

void write_batch_tsv_header(std::ostream& out) {
  out << "batch\tquery_id\tpos_id\tneg_id\tt_pos\tt_neg\tcluster\tbin\n";
}

void write_batch_tsv(const Batch& batch, std::ostream& out) {
  for (const BatchTuple& t : batch.tuples) {
    out << batch.index << '\t' << t.query_id << '\t' << t.pos_id << '\t'
        << t.neg_id << '\t' << format_fixed(t.t_pos) << '\t'
        << format_fixed(t.t_neg) << '\t' << t.cluster << '\t' << t.bin << '\n';
  }
}

}  // namespace tasb
