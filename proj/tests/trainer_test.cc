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

#include "tasb/trainer.h"

#include <doctest.h>

#include "tasb/synthetic.h"
#include "test_util.h"

namespace tasb {
namespace {

// Stop point of a history fed one evaluation at a time; -1 if never.
long long first_stop(const std::vector<double>& history, int patience) {
  for (std::size_t n = 1; n <= history.size(); ++n) {
    if (early_stop_check(std::span(history).first(n), patience)) {
      return static_cast<long long>(n) - 1;
    }
  }
  return -1;
}

TEST_CASE("early stopping fires after exactly `patience` stale evaluations") {
  std::vector<double> h = {0.5};
  for (int i = 0; i < 40; ++i) h.push_back(0.4);
  CHECK(first_stop(h, 30) == 30);

  // Ties with the best do not count as improvements.
  std::vector<double> flat(50, 0.3);
  CHECK(first_stop(flat, 30) == 30);

  // A late improvement resets the count.
  std::vector<double> late = {0.1, 0.2};
  for (int i = 0; i < 29; ++i) late.push_back(0.15);
  late.push_back(0.25);
  for (int i = 0; i < 40; ++i) late.push_back(0.2);
  CHECK(first_stop(late, 30) == 31 + 30);

  // Steady improvement never stops.
  std::vector<double> rising;
  for (int i = 0; i < 100; ++i) rising.push_back(i * 0.01);
  CHECK(first_stop(rising, 30) == -1);

  CHECK(first_stop({1.0, 0.0}, 1) == 1);
  CHECK_FALSE(early_stop_check({}, 30));
  CHECK_THROWS_AS(early_stop_check(h, 0), Error);
  CHECK(best_eval_index(std::vector<double>{0.2, 0.5, 0.5, 0.1}) == 1);
}

SyntheticConfig tiny_config() {
  SyntheticConfig c;
  c.topics = 4;
  c.train_queries_per_topic = 10;
  c.validation_queries_per_topic = 2;
  c.test_queries_per_topic = 2;
  c.passages = 200;
  c.easy_negatives = 2;
  c.hard_negatives = 3;
  c.seed = 3;
  return c;
}

struct Setup {
  SyntheticCorpus corpus = make_synthetic_corpus(tiny_config());
  QueryStore all_queries;
  TrainingPool pool{corpus.triples.triples, corpus.triples.scores, 10};
  TopicClusters clusters;
  ValidationSet validation;
  StudentModel init = StudentModel::random(512, 16, 5);

  Setup() {
    for (const auto& q : corpus.train_queries) all_queries.add(q);
    for (const auto& q : corpus.validation_queries) all_queries.add(q);
    clusters = cluster_queries(init, corpus.train_queries, 4, 7);
    validation = build_validation_set(init, corpus.validation_queries,
                                      corpus.passages, corpus.qrels, 100, 20, 9);
  }

  TrainInputs inputs() const {
    TrainInputs in;
    in.queries = &all_queries;
    in.passages = &corpus.passages;
    in.pool = &pool;
    in.clusters = &clusters;
    in.validation = &validation;
    in.validation_qrels = &corpus.qrels;
    return in;
  }
};

TrainConfig small_train(SamplingStrategy s, bool threaded) {
  TrainConfig c;
  c.strategy = s;
  c.batch_size = 8;
  c.max_steps = 60;
  c.eval_interval = 20;
  c.learning_rate = 1e-3;
  c.sampler_seed = 11;
  c.teacher_seed = 12;
  c.threaded = threaded;
  return c;
}

TEST_CASE("training is deterministic and independent of the batch queue") {
  const Setup s;
  for (SamplingStrategy strategy : {SamplingStrategy::kRandom,
                                    SamplingStrategy::kTasBalanced}) {
    const TrainResult a = train(small_train(strategy, false), s.init, s.inputs());
    const TrainResult b = train(small_train(strategy, true), s.init, s.inputs());
    CHECK(a.last.weights == b.last.weights);
    CHECK(a.best.weights == b.best.weights);
    CHECK(a.steps == 60);
    REQUIRE(a.evals.size() == 4);  // steps 0, 20, 40, 60
    CHECK(a.evals.front().step == 0);
    CHECK(a.evals.back().step == 60);
    CHECK(a.losses.size() == 60);
    CHECK(a.best_ndcg10 >= a.evals.front().ndcg10);
  }
}

TEST_CASE("training lowers the pairwise loss and writes its logs") {
  const Setup s;
  TrainConfig c = small_train(SamplingStrategy::kTas, false);
  c.loss.mode = TeacherMode::kPairwise;
  c.max_steps = 300;
  c.eval_interval = 100;
  c.learning_rate = 3e-3;
  testing::TempDir dir;
  TrainOutputs out;
  out.checkpoint = dir / "m.ckpt";
  out.loss_log = dir / "loss.tsv";
  out.eval_log = dir / "eval.tsv";
  out.batch_dump = dir / "batches.tsv";
  const TrainResult r = train(c, s.init, s.inputs(), out);
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 30; ++i) {
    early += r.losses[static_cast<std::size_t>(i)].loss.total;
    late += r.losses[r.losses.size() - 1 - static_cast<std::size_t>(i)].loss.total;
  }
  CHECK(late < early);
  CHECK(read_checkpoint(out.checkpoint).weights == r.best.weights);
  const std::string loss_text = testing::read_text(out.loss_log);
  CHECK(loss_text.rfind("step\tL_pair\tL_InB\tL_DS\n", 0) == 0);
  CHECK(std::count(loss_text.begin(), loss_text.end(), '\n') == 301);
  const std::string batches = testing::read_text(out.batch_dump);
  CHECK(std::count(batches.begin(), batches.end(), '\n') == 1 + 300 * 8);
}

TEST_CASE("training stops early on a stale validation metric") {
  const Setup s;
  TrainConfig c = small_train(SamplingStrategy::kRandom, false);
  c.max_steps = 1000;
  c.eval_interval = 1;
  c.patience = 3;
  c.learning_rate = 0.5;  // large steps wreck the model quickly
  const TrainResult r = train(c, s.init, s.inputs());
  CHECK(r.early_stopped);
  CHECK(r.steps < 1000);
  std::vector<double> h;
  for (const auto& e : r.evals) h.push_back(e.ndcg10);
  CHECK(early_stop_check(h, 3));
  CHECK_FALSE(early_stop_check(std::span(h).first(h.size() - 1), 3));
}

TEST_CASE("validation set rejects overlap with training queries") {
  const Setup s;
  std::set<std::string> train_ids;
  for (const auto& q : s.corpus.train_queries) train_ids.insert(q.id);
  CHECK_NOTHROW(build_validation_set(s.init, s.corpus.validation_queries,
                                     s.corpus.passages, s.corpus.qrels, 5, 10,
                                     1, train_ids));
  CHECK_THROWS_AS(build_validation_set(s.init, s.corpus.train_queries,
                                       s.corpus.passages, s.corpus.qrels, 5,
                                       10, 1, train_ids),
                  Error);
}

TEST_CASE("validation pools hold the baseline top-k plus relevant passages") {
  const Setup s;
  REQUIRE_FALSE(s.validation.pools.empty());
  for (const auto& [qid, pool] : s.validation.pools) {
    CHECK(std::is_sorted(pool.begin(), pool.end()));
    CHECK(pool.size() >= 20);
    for (const auto& [pid, grade] : *s.corpus.qrels.judgments(qid)) {
      if (grade >= 1) {
        CHECK(std::binary_search(pool.begin(), pool.end(), pid));
      }
    }
  }
  testing::TempDir dir;
  write_validation_set(s.validation, dir / "v.tsv");
  CHECK(read_validation_set(dir / "v.tsv").pools == s.validation.pools);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

}  // namespace
}  // namespace tasb
