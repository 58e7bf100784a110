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

#include "tasb/synthetic.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tasb/common.h"

namespace tasb {
namespace {

// Inverse-CDF draws from a Zipf(1) distribution over `n` ranks.
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / static_cast<double>(i + 1);
      cdf_[i] = total;
    }
    for (double& c : cdf_) c /= total;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                 cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::string generic_word(std::size_t i) { return "g" + std::to_string(i); }
std::string background_word(std::size_t t, std::size_t i) {
  return "t" + std::to_string(t) + "b" + std::to_string(i);
}
std::string concept_word(std::size_t t, std::size_t i) {
  return "t" + std::to_string(t) + "c" + std::to_string(i);
}

void shuffle(std::vector<std::string>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform(i)]);
  }
}

struct Draft {
  std::vector<std::string> tokens;
  std::size_t topic = 0;
};

enum class Split { kTrain, kValidation, kTest };

struct DraftQuery {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t topic = 0;
  Split split = Split::kTrain;
  std::size_t relevant = 0;  // passage index, grade 3
  std::size_t partial = 0;   // passage index, grade 1
};

// `k` distinct concept indices of one topic, sorted.
std::vector<std::size_t> draw_concepts(std::size_t pool, std::size_t k,
                                       Rng& rng) {
  auto picks = sample_without_replacement(pool, k, rng);
  std::sort(picks.begin(), picks.end());
  return picks;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& c) {
  const std::size_t per_topic = c.train_queries_per_topic +
                                c.validation_queries_per_topic +
                                c.test_queries_per_topic;
  if (c.topics < 2) throw Error("synthetic corpus needs at least two topics");
  if (per_topic < 1) throw Error("synthetic corpus needs queries");
  if (c.passages < c.topics * (per_topic + 1)) {
    throw Error("synthetic corpus needs more than one passage per query");
  }
  if (c.background_vocab < 1 || c.generic_vocab < 1 || c.query_concepts < 2 ||
      c.concept_vocab < c.query_concepts + 1) {
    throw Error("synthetic corpus vocabulary too small");
  }
  if (c.generic_share < 0.0 || c.background_share < 0.0 ||
      c.generic_share + c.background_share >= 1.0) {
    throw Error("generic and background shares must sum to less than 1");
  }
  const auto generic_count = static_cast<std::size_t>(
      std::lround(c.generic_share * static_cast<double>(c.passage_length)));
  const auto background_count = static_cast<std::size_t>(
      std::lround(c.background_share * static_cast<double>(c.passage_length)));
  if (generic_count + background_count + 2 * c.query_concepts >
      c.passage_length) {
    throw Error("synthetic passage length too small for its concepts");
  }

  Rng rng(c.seed);
  const ZipfSampler generic(c.generic_vocab);
  std::vector<Draft> passages;
  std::vector<std::vector<std::size_t>> topic_passages(c.topics);
  std::vector<DraftQuery> queries;
  std::size_t next_query = 0;

  auto add_concepts = [&](Draft& d, const std::vector<std::size_t>& concepts) {
    for (std::size_t x : concepts) {
      d.tokens.push_back(concept_word(d.topic, x));
      d.tokens.push_back(concept_word(d.topic, x));
    }
  };

  for (std::size_t t = 0; t < c.topics; ++t) {
    const std::size_t n_pass =
        c.passages / c.topics + (t < c.passages % c.topics ? 1 : 0);
    std::set<std::vector<std::size_t>> combos;
    for (std::size_t i = 0; i < n_pass; ++i) {
      Draft d;
      d.topic = t;
      for (std::size_t g = 0; g < generic_count; ++g) {
        d.tokens.push_back(generic_word(generic.draw(rng)));
      }
      for (std::size_t b = 0; b < background_count; ++b) {
        d.tokens.push_back(background_word(t, rng.uniform(c.background_vocab)));
      }
      topic_passages[t].push_back(passages.size());
      passages.push_back(std::move(d));
    }
    const auto& mine = topic_passages[t];
    // The first per_topic passages answer one query each; the rest carry
    // concept combinations no query asks for.
    for (std::size_t i = 0; i < n_pass; ++i) {
      std::vector<std::size_t> concepts;
      do {
        concepts = draw_concepts(c.concept_vocab, c.query_concepts, rng);
      } while (!combos.insert(concepts).second && combos.size() < 100000);
      add_concepts(passages[mine[i]], concepts);
      if (i >= per_topic) continue;

      DraftQuery q;
      q.id = "q" + std::to_string(next_query++);
      q.topic = t;
      q.split = i < c.train_queries_per_topic ? Split::kTrain
                : i < c.train_queries_per_topic + c.validation_queries_per_topic
                    ? Split::kValidation
                    : Split::kTest;
      q.relevant = mine[i];
      for (std::size_t x : concepts) q.tokens.push_back(concept_word(t, x));
      q.tokens.push_back(background_word(t, rng.uniform(c.background_vocab)));
      for (std::size_t g = 0; g < c.query_generic; ++g) {
        q.tokens.push_back(generic_word(generic.draw(rng)));
      }
      shuffle(q.tokens, rng);
      // A second passage of the topic mentions all but one of the concepts.
      std::size_t partial = mine[rng.uniform(mine.size())];
      while (partial == q.relevant) partial = mine[rng.uniform(mine.size())];
      q.partial = partial;
      const std::size_t dropped = rng.uniform(concepts.size());
      for (std::size_t j = 0; j < concepts.size(); ++j) {
        if (j != dropped) {
          passages[partial].tokens.push_back(concept_word(t, concepts[j]));
        }
      }
      queries.push_back(std::move(q));
    }
  }
  for (Draft& d : passages) {
    while (d.tokens.size() < c.passage_length) {
      d.tokens.push_back(generic_word(generic.draw(rng)));
    }
    shuffle(d.tokens, rng);
  }

  SyntheticCorpus out;
  auto pid = [](std::size_t i) { return "D" + std::to_string(i); };
  for (std::size_t i = 0; i < passages.size(); ++i) {
    out.passages.add(Passage{pid(i), passages[i].tokens});
  }

  auto teacher = [&](const DraftQuery& q, std::size_t p, int grade) {
    const std::set<std::string> qt(q.tokens.begin(), q.tokens.end());
    const std::set<std::string> pt(passages[p].tokens.begin(),
                                   passages[p].tokens.end());
    std::size_t overlap = 0;
    for (const auto& w : qt) overlap += pt.count(w);
    return c.grade_weight * grade +
           c.overlap_weight * static_cast<double>(overlap) +
           c.teacher_noise * rng.normal();
  };

  for (const DraftQuery& q : queries) {
    out.qrels.set(q.id, pid(q.relevant), 3);
    out.qrels.set(q.id, pid(q.partial), 1);
    if (q.split == Split::kTest) {
      out.test_qrels.set(q.id, pid(q.relevant), 3);
      out.test_qrels.set(q.id, pid(q.partial), 1);
    }
    Query query{q.id, q.tokens};
    switch (q.split) {
      case Split::kTrain:
        out.train_queries.add(std::move(query));
        out.train_topic.push_back(q.topic);
        break;
      case Split::kValidation:
        out.validation_queries.add(std::move(query));
        continue;
      case Split::kTest:
        out.test_queries.add(std::move(query));
        continue;
    }
    out.triples.scores.add(q.id, pid(q.relevant), teacher(q, q.relevant, 3));
    auto add_negative = [&](std::size_t p, int grade) {
      out.triples.scores.add(q.id, pid(p), teacher(q, p, grade));
      out.triples.triples.push_back({q.id, pid(q.relevant), pid(p)});
    };
    add_negative(q.partial, 1);
    const auto& same = topic_passages[q.topic];
    std::set<std::size_t> used{q.relevant, q.partial};
    const std::size_t hard = std::min(c.hard_negatives, same.size() - 2);
    while (used.size() < 2 + hard) {
      const std::size_t p = same[rng.uniform(same.size())];
      if (used.insert(p).second) add_negative(p, 0);
    }
    for (std::size_t e = 0; e < c.easy_negatives;) {
      const std::size_t p = rng.uniform(passages.size());
      if (passages[p].topic == q.topic || !used.insert(p).second) continue;
      add_negative(p, 0);
      ++e;
    }
  }
  return out;
}

CorpusFiles CorpusFiles::in(const std::filesystem::path& dir) {
  return {dir / "collection.tsv",    dir / "queries.train.tsv",
          dir / "queries.dev.tsv",   dir / "queries.test.tsv",
          dir / "train.scores.tsv",  dir / "qrels.tsv",
          dir / "qrels.test.tsv"};
}

namespace {

void write_text_store(const auto& store, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const auto& item : store) {
      out << item.id << '\t';
      for (std::size_t i = 0; i < item.tokens.size(); ++i) {
        out << (i ? " " : "") << item.tokens[i];
      }
      out << '\n';
    }
  });
}

}  // namespace

void write_synthetic_corpus(const SyntheticCorpus& corpus,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const CorpusFiles files = CorpusFiles::in(dir);
  write_text_store(corpus.passages, files.collection);
  write_text_store(corpus.train_queries, files.train_queries);
  write_text_store(corpus.validation_queries, files.validation_queries);
  write_text_store(corpus.test_queries, files.test_queries);
  write_triples_with_scores(corpus.triples.triples, corpus.triples.scores,
                            files.scores);
  write_qrels(corpus.qrels, files.qrels);
  write_qrels(corpus.test_qrels, files.test_qrels);
}

}  // namespace tasb
