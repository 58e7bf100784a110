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

// Topical toy corpus. Every topic owns a set of background words and a pool
// of concept words. A query names a few concepts of its topic; its relevant
// passage repeats exactly those concepts, while other passages of the topic
// carry other concept combinations. All passages are padded with frequent
// generic words shared by every topic. Held-out queries are new concept
// combinations from the same topics.

#ifndef TASB_SYNTHETIC_H_
#define TASB_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tasb/corpus.h"

namespace tasb {

struct SyntheticConfig {
  std::size_t topics = 50;
  std::size_t train_queries_per_topic = 40;
  std::size_t validation_queries_per_topic = 2;
  std::size_t test_queries_per_topic = 4;
  std::size_t passages = 4000;  // at least one per query

  std::size_t background_vocab = 20;  // per topic
  std::size_t concept_vocab = 12;     // per topic
  std::size_t query_concepts = 3;
  std::size_t query_generic = 0;      // generic words added to each query
  std::size_t generic_vocab = 400;    // Zipf-distributed across all topics
  std::size_t passage_length = 40;
  double generic_share = 0.5;         // fraction of passage tokens
  double background_share = 0.25;

  std::size_t easy_negatives = 4;   // other topics
  std::size_t hard_negatives = 12;  // same topic
  // Teacher score: grade_weight * grade + overlap_weight * (distinct query
  // words found in the passage) + teacher_noise * N(0, 1).
  double grade_weight = 1.0;
  double overlap_weight = 1.0;
  double teacher_noise = 0.2;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  PassageStore passages;
  QueryStore train_queries;
  QueryStore validation_queries;
  QueryStore test_queries;
  TripleData triples;
  Qrels qrels;       // judgments for every query
  Qrels test_qrels;  // test queries only
  std::vector<std::size_t> train_topic;  // topic of each training query
};

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config);

// File names under `dir`.
struct CorpusFiles {
  std::filesystem::path collection;
  std::filesystem::path train_queries;
  std::filesystem::path validation_queries;
  std::filesystem::path test_queries;
  std::filesystem::path scores;
  std::filesystem::path qrels;
  std::filesystem::path test_qrels;

  static CorpusFiles in(const std::filesystem::path& dir);
};

void write_synthetic_corpus(const SyntheticCorpus& corpus,
                            const std::filesystem::path& dir);

}  // namespace tasb

#endif  // TASB_SYNTHETIC_H_
