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

// Training batch composition.
//
//   random        b distinct queries from the whole pool, one uniform
//                 (pos, neg) pair each.
//   tas           n distinct clusters, floor(b/n) distinct queries from each,
//                 one uniform pair each.
//   tas-balanced  as tas, but each pair is drawn in two stages: a uniform
//                 non-empty margin bin of the query, then a uniform pair from
//                 that bin.
//
// Margin bins split [m_min, m_max] of a query's teacher margins
// (t_pos - t_neg) into h equal half-open ranges; the last range is closed so
// the maximum-margin pair lands in bin h-1.

#ifndef TASB_SAMPLER_H_
#define TASB_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tasb/clustering.h"
#include "tasb/common.h"
#include "tasb/corpus.h"

namespace tasb {

enum class SamplingStrategy { kRandom, kTas, kTasBalanced };

std::string_view to_string(SamplingStrategy s);
SamplingStrategy parse_sampling_strategy(std::string_view name);

struct PassagePair {
  std::string pos_id;
  std::string neg_id;
  double t_pos = 0.0;
  double t_neg = 0.0;

  double margin() const { return t_pos - t_neg; }
};

struct BinnedPairs {
  double m_min = 0.0;
  double bin_width = 0.0;  // 0 when all margins coincide
  int num_bins = 1;
  std::vector<std::vector<std::size_t>> bins;  // indices into the pair list
  std::vector<int> non_empty;                  // ascending bin indices

  int bin_of(double margin) const;
};

// Bin index of `margin` for a range starting at m_min with width `width`,
// clamped to [0, h-1]; width 0 maps everything to bin 0.
int margin_bin(double margin, double m_min, double width, int h);

BinnedPairs compute_margin_bins(std::span<const PassagePair> pairs, int h);

// Per-query pair sets with their teacher scores, the population the samplers
// draw from.
class TrainingPool {
 public:
  TrainingPool(std::span<const TrainTriple> triples,
               const TeacherScoreStore& scores, int num_bins = 10);

  std::size_t num_queries() const { return query_ids_.size(); }
  const std::vector<std::string>& query_ids() const { return query_ids_; }
  int num_bins() const { return num_bins_; }

  // Query position in query_ids(), or -1.
  long long position(std::string_view query_id) const;
  std::span<const PassagePair> pairs(std::size_t query) const {
    return pairs_[query];
  }
  const BinnedPairs& bins(std::size_t query) const { return bins_[query]; }

 private:
  std::vector<std::string> query_ids_;
  std::unordered_map<std::string, std::size_t> positions_;
  std::vector<std::vector<PassagePair>> pairs_;
  std::vector<BinnedPairs> bins_;
  int num_bins_;
};

struct BatchTuple {
  std::string query_id;
  std::string pos_id;
  std::string neg_id;
  double t_pos = 0.0;
  double t_neg = 0.0;
  int cluster = -1;  // -1 for random sampling
  int bin = -1;      // margin bin of the pair (always recorded)
};

struct Batch {
  std::vector<BatchTuple> tuples;
  SamplingStrategy strategy = SamplingStrategy::kRandom;
  std::vector<int> clusters;
  std::uint64_t index = 0;  // position in the batch stream

  std::size_t size() const { return tuples.size(); }
};

Batch sample_random_batch(const TrainingPool& pool, std::size_t b, Rng& rng);

// Cluster members restricted to queries that have training pairs, as pool
// positions.
class ClusterIndex {
 public:
  ClusterIndex(const TopicClusters& clusters, const TrainingPool& pool);
  std::size_t num_clusters() const { return members_.size(); }
  std::span<const std::size_t> members(std::size_t cluster) const {
    return members_[cluster];
  }

 private:
  std::vector<std::vector<std::size_t>> members_;
};

inline constexpr int kClusterResampleAttempts = 100;

// n * floor(b/n) queries.
Batch sample_tas_batch(const TrainingPool& pool, const ClusterIndex& clusters,
                       std::size_t b, std::size_t n, Rng& rng);
Batch sample_tas_balanced_batch(const TrainingPool& pool,
                                const ClusterIndex& clusters, std::size_t b,
                                std::size_t n, Rng& rng);

struct SamplerConfig {
  SamplingStrategy strategy = SamplingStrategy::kTasBalanced;
  std::size_t batch_size = 32;
  std::size_t clusters_per_batch = 1;
  std::uint64_t seed = 0;
};

// Endless batch stream for one strategy. Not thread-safe; BatchQueue moves it
// onto the producer thread.
class BatchSampler {
 public:
  BatchSampler(const TrainingPool& pool, const TopicClusters* clusters,
               SamplerConfig config);
  Batch next();
  const SamplerConfig& config() const { return config_; }

 private:
  const TrainingPool* pool_;
  std::optional<ClusterIndex> clusters_;
  SamplerConfig config_;
  Rng rng_;
  std::uint64_t produced_ = 0;
};

// `batch query pos neg t_pos t_neg cluster bin`, one tuple per line.
void write_batch_tsv_header(std::ostream& out);
void write_batch_tsv(const Batch& batch, std::ostream& out);

}  // namespace tasb

#endif  // TASB_SAMPLER_H_
