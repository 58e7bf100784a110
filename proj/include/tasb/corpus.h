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

// MSMARCO-style artifacts: collection and query TSVs, training triples with
// pairwise teacher scores, TREC qrels and TREC run files.

#ifndef TASB_CORPUS_H_
#define TASB_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tasb/common.h"

namespace tasb {

inline constexpr std::size_t kDefaultQueryCap = 30;
inline constexpr std::size_t kDefaultPassageCap = 200;

// Lowercase ASCII, every non-alphanumeric byte becomes a separator, split on
// whitespace. Pure and idempotent on already-normalized text.
std::vector<std::string> tokenize(std::string_view text);

struct Query {
  std::string id;
  std::vector<std::string> tokens;
};

struct Passage {
  std::string id;
  std::vector<std::string> tokens;
};

// id -> item, insertion-ordered, immutable once loading finishes.
template <typename Item>
class Store {
 public:
  void add(Item item) {
    auto [it, inserted] = index_.emplace(item.id, items_.size());
    if (!inserted) throw Error("duplicate id '" + item.id + "'");
    items_.push_back(std::move(item));
  }

  const Item* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &items_[it->second];
  }

  const Item& at(std::string_view id) const {
    const Item* item = find(id);
    if (item == nullptr) throw Error("unknown id '" + std::string(id) + "'");
    return *item;
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Item& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

using QueryStore = Store<Query>;
using PassageStore = Store<Passage>;

// Rows are `id<TAB>text`. Malformed rows and duplicate ids are hard errors
// carrying the line number; rows whose text tokenizes to nothing are skipped
// with a warning. Tokens beyond `cap` are dropped (prefix kept).
PassageStore load_collection(const std::filesystem::path& path,
                             std::size_t passage_cap = kDefaultPassageCap);
QueryStore load_queries(const std::filesystem::path& path,
                        std::size_t query_cap = kDefaultQueryCap);

struct TrainTriple {
  std::string query_id;
  std::string pos_id;
  std::string neg_id;

  friend bool operator==(const TrainTriple&, const TrainTriple&) = default;
};

// Pairwise teacher scores keyed by (query_id, passage_id).
class TeacherScoreStore {
 public:
  // Re-inserting an existing pair with a different score is an error: the
  // teacher would be ambiguous.
  void add(std::string_view query_id, std::string_view passage_id,
           double score);
  std::optional<double> find(std::string_view query_id,
                             std::string_view passage_id) const;
  double at(std::string_view query_id, std::string_view passage_id) const;
  std::size_t size() const { return scores_.size(); }

 private:
  static std::string key(std::string_view q, std::string_view p);
  std::unordered_map<std::string, double> scores_;
};

struct TripleData {
  std::vector<TrainTriple> triples;
  TeacherScoreStore scores;
};

// Triples file: `qid<TAB>pos_id<TAB>neg_id`. Scores file:
// `qid<TAB>pos_id<TAB>neg_id<TAB>score_pos<TAB>score_neg`. An empty
// `triples_path` takes the triples from the scores file itself. Every triple
// must be covered by the scores file.
TripleData load_triples_with_scores(const std::filesystem::path& triples_path,
                                    const std::filesystem::path& scores_path);

// Referential integrity of triples against both stores and the score store.
void check_triples(std::span<const TrainTriple> triples,
                   const QueryStore& queries, const PassageStore& passages,
                   const TeacherScoreStore& scores);

void write_triples_with_scores(std::span<const TrainTriple> triples,
                               const TeacherScoreStore& scores,
                               const std::filesystem::path& path);

// Graded judgments; absent pairs have grade 0.
class Qrels {
 public:
  void set(const std::string& query_id, const std::string& passage_id,
           int grade);
  int grade(std::string_view query_id, std::string_view passage_id) const;
  // Judged passages of one query (nullptr if the query has no judgments).
  const std::map<std::string, int>* judgments(std::string_view query_id) const;
  const std::map<std::string, std::map<std::string, int>>& all() const {
    return grades_;
  }
  std::size_t num_queries() const { return grades_.size(); }

 private:
  std::map<std::string, std::map<std::string, int>> grades_;
};

// `qid 0 pid grade`, whitespace-separated.
Qrels load_qrels(const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

struct ScoredPassage {
  std::string passage_id;
  double score = 0.0;

  friend bool operator==(const ScoredPassage&, const ScoredPassage&) = default;
};

// Descending score, ties by ascending passage id.
bool ranks_before(const ScoredPassage& a, const ScoredPassage& b);
void sort_ranking(std::vector<ScoredPassage>& ranking);

// Per-query rankings. Queries iterate in id order so written files are
// deterministic.
class Run {
 public:
  // Sorts `ranking`; duplicate passage ids are a hard error.
  void set(const std::string& query_id, std::vector<ScoredPassage> ranking);
  // Keeps the given order as the ranking.
  void set_ranked(const std::string& query_id,
                  std::vector<ScoredPassage> ranking);
  const std::vector<ScoredPassage>* find(std::string_view query_id) const;
  const std::map<std::string, std::vector<ScoredPassage>>& all() const {
    return rankings_;
  }
  std::size_t num_queries() const { return rankings_.size(); }

  friend bool operator==(const Run&, const Run&) = default;

 private:
  std::map<std::string, std::vector<ScoredPassage>> rankings_;
};

// `qid Q0 pid rank score tag`, scores with six decimals.
void write_run(const Run& run, const std::filesystem::path& path,
               std::string_view tag);
std::string format_run(const Run& run, std::string_view tag);
// Non-contiguous ranks trigger a warning and a re-rank by score; a repeated
// passage within one query is a hard error.
Run load_run(const std::filesystem::path& path);

}  // namespace tasb

#endif  // TASB_CORPUS_H_
