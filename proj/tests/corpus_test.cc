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

#include "tasb/corpus.h"

#include <doctest.h>

#include "test_util.h"

namespace tasb {
namespace {

using testing::TempDir;
using testing::write_text;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  const std::vector<std::string> expected = {"what", "is", "a", "b2b",
                                             "sale", "s"};
  CHECK(tokenize("What is a B2B-sale's?") == expected);
  CHECK(tokenize("") .empty());
  CHECK(tokenize("  \t ,.; ").empty());
  // Non-ASCII bytes separate tokens.
  const std::vector<std::string> utf8 = {"caf", "au", "lait"};
  CHECK(tokenize("caf\xc3\xa9 au lait") == utf8);
}

TEST_CASE("tokenize is idempotent on normalized text") {
  const auto once = tokenize("The QUICK brown-fox, 42 times!");
  std::string joined;
  for (const auto& t : once) joined += t + " ";
  CHECK(tokenize(joined) == once);
}

TEST_CASE("collection loader keeps order, caps length and skips empty text") {
  TempDir dir;
  const auto path = write_text(dir / "c.tsv",
                               "p1\tOne two three four\n"
                               "p2\t...\n"
                               "p3\tFive\n");
  set_warnings_enabled(false);
  const PassageStore store = load_collection(path, 3);
  set_warnings_enabled(true);
  REQUIRE(store.size() == 2);
  CHECK(store[0].id == "p1");
  CHECK(store[0].tokens == std::vector<std::string>{"one", "two", "three"});
  CHECK(store.at("p3").tokens == std::vector<std::string>{"five"});
  CHECK_FALSE(store.contains("p2"));
  CHECK_THROWS_AS(store.at("missing"), Error);
}

TEST_CASE("loaders reject malformed rows and duplicate ids with line numbers") {
  TempDir dir;
  const auto no_tab = write_text(dir / "a.tsv", "q1\thello\nq2 no tab\n");
  CHECK_THROWS_WITH_AS(load_queries(no_tab), doctest::Contains(":2"), Error);
  const auto dup = write_text(dir / "b.tsv", "q1\thello\nq1\tworld\n");
  CHECK_THROWS_WITH_AS(load_queries(dup), doctest::Contains("duplicate"),
                       Error);
  CHECK_THROWS_AS(load_queries(dir / "missing.tsv"), Error);
}

TEST_CASE("triples and scores round-trip") {
  TempDir dir;
  const auto scores_path = write_text(dir / "s.tsv",
                                      "q1\tp1\tp2\t5.5\t1.25\n"
                                      "q1\tp1\tp3\t5.5\t-0.5\n"
                                      "q2\tp3\tp1\t2\t1\n");
  TripleData data = load_triples_with_scores({}, scores_path);
  REQUIRE(data.triples.size() == 3);
  CHECK(data.triples[1] == TrainTriple{"q1", "p1", "p3"});
  CHECK(data.scores.at("q1", "p2") == 1.25);
  CHECK(data.scores.at("q1", "p3") == -0.5);
  CHECK(data.scores.at("q2", "p1") == 1.0);
  CHECK_FALSE(data.scores.find("q2", "p2").has_value());

  write_triples_with_scores(data.triples, data.scores, dir / "out.tsv");
  TripleData again = load_triples_with_scores({}, dir / "out.tsv");
  CHECK(again.triples == data.triples);
  CHECK(again.scores.size() == data.scores.size());

  const auto triples_path = write_text(dir / "t.tsv", "q1\tp1\tp3\n");
  TripleData subset = load_triples_with_scores(triples_path, scores_path);
  REQUIRE(subset.triples.size() == 1);
  const auto uncovered = write_text(dir / "u.tsv", "q2\tp2\tp3\n");
  CHECK_THROWS_AS(load_triples_with_scores(uncovered, scores_path), Error);
}

TEST_CASE("conflicting teacher scores are rejected") {
  TeacherScoreStore store;
  store.add("q", "p", 1.0);
  store.add("q", "p", 1.0);
  CHECK(store.size() == 1);
  CHECK_THROWS_AS(store.add("q", "p", 2.0), Error);
}

TEST_CASE("check_triples finds dangling ids") {
  QueryStore queries;
  queries.add({"q1", {"a"}});
  PassageStore passages;
  passages.add({"p1", {"a"}});
  passages.add({"p2", {"b"}});
  TeacherScoreStore scores;
  scores.add("q1", "p1", 2.0);
  scores.add("q1", "p2", 1.0);
  const std::vector<TrainTriple> ok = {{"q1", "p1", "p2"}};
  CHECK_NOTHROW(check_triples(ok, queries, passages, scores));
  const std::vector<TrainTriple> bad_q = {{"q9", "p1", "p2"}};
  CHECK_THROWS_AS(check_triples(bad_q, queries, passages, scores), Error);
  const std::vector<TrainTriple> bad_p = {{"q1", "p1", "p9"}};
  CHECK_THROWS_AS(check_triples(bad_p, queries, passages, scores), Error);
}

TEST_CASE("qrels parse graded judgments") {
  TempDir dir;
  const auto path = write_text(dir / "q.txt",
                               "q1 0 p1 3\nq1 0 p2 0\nq2 0 p1 1\n");
  const Qrels qrels = load_qrels(path);
  CHECK(qrels.num_queries() == 2);
  CHECK(qrels.grade("q1", "p1") == 3);
  CHECK(qrels.grade("q1", "p2") == 0);
  CHECK(qrels.grade("q1", "p9") == 0);
  CHECK(qrels.judgments("q3") == nullptr);
  write_qrels(qrels, dir / "again.txt");
  CHECK(load_qrels(dir / "again.txt").all() == qrels.all());
  const auto bad = write_text(dir / "bad.txt", "q1 0 p1\n");
  CHECK_THROWS_AS(load_qrels(bad), Error);
}

TEST_CASE("run files round-trip with deterministic ordering") {
  Run run;
  run.set("q2", {{"p1", 0.5}, {"p2", 0.75}, {"p0", 0.5}});
  run.set("q1", {{"p9", -1.0}});
  const std::vector<ScoredPassage> expected = {
      {"p2", 0.75}, {"p0", 0.5}, {"p1", 0.5}};
  CHECK(*run.find("q2") == expected);
  const std::string text = format_run(run, "tag");
  CHECK(text.rfind("q1 Q0 p9 1 -1.000000 tag\n", 0) == 0);
  CHECK(text.find("q2 Q0 p2 1 0.750000 tag\n") != std::string::npos);

  TempDir dir;
  write_run(run, dir / "r.trec", "tag");
  const Run loaded = load_run(dir / "r.trec");
  CHECK(loaded == run);
  CHECK(format_run(loaded, "tag") == text);
  CHECK_THROWS_AS(run.set("q3", {{"p1", 1.0}, {"p1", 0.5}}), Error);
}

TEST_CASE("run loader re-ranks gapped ranks and rejects repeated passages") {
  TempDir dir;
  const auto gapped = write_text(dir / "g.trec",
                                 "q1 Q0 p1 1 0.2 t\nq1 Q0 p2 5 0.9 t\n");
  set_warnings_enabled(false);
  const Run run = load_run(gapped);
  set_warnings_enabled(true);
  CHECK((*run.find("q1"))[0].passage_id == "p2");
  const auto repeated = write_text(dir / "r.trec",
                                   "q1 Q0 p1 1 0.9 t\nq1 Q0 p1 2 0.2 t\n");
  CHECK_THROWS_AS(load_run(repeated), Error);
}

}  // namespace
}  // namespace tasb
