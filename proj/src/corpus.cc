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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace tasb {
namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

template <typename Item>
Store<Item> load_id_text(const std::filesystem::path& path, std::size_t cap) {
  std::ifstream in = open_text(path);
  Store<Item> store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(where(path, line_no) + ": malformed row, expected id<TAB>text");
    }
    Item item;
    item.id = std::string(trim(std::string_view(line).substr(0, tab)));
    item.tokens = tokenize(std::string_view(line).substr(tab + 1));
    if (item.tokens.empty()) {
      log_warning(where(path, line_no) + ": empty text for id '" + item.id +
                  "', skipped");
      continue;
    }
    if (item.tokens.size() > cap) item.tokens.resize(cap);
    try {
      store.add(std::move(item));
    } catch (const Error& e) {
      throw Error(where(path, line_no) + ": " + e.what());
    }
  }
  return store;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

PassageStore load_collection(const std::filesystem::path& path,
                             std::size_t passage_cap) {
  return load_id_text<Passage>(path, passage_cap);
}

QueryStore load_queries(const std::filesystem::path& path,
                        std::size_t query_cap) {
  return load_id_text<Query>(path, query_cap);
}

std::string TeacherScoreStore::key(std::string_view q, std::string_view p) {
  std::string k;
  k.reserve(q.size() + p.size() + 1);
  k.append(q);
  k.push_back('\x1f');
  k.append(p);
  return k;
}

void TeacherScoreStore::add(std::string_view query_id,
                            std::string_view passage_id, double score) {
  if (!std::isfinite(score)) {
    throw Error("non-finite teacher score for (" + std::string(query_id) +
                ", " + std::string(passage_id) + ")");
  }
  auto [it, inserted] = scores_.emplace(key(query_id, passage_id), score);
  if (!inserted && it->second != score) {
    throw Error("ambiguous teacher score for (" + std::string(query_id) +
                ", " + std::string(passage_id) + "): " +
                format_fixed(it->second) + " vs " + format_fixed(score));
  }
}

std::optional<double> TeacherScoreStore::find(
    std::string_view query_id, std::string_view passage_id) const {
  auto it = scores_.find(key(query_id, passage_id));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

double TeacherScoreStore::at(std::string_view query_id,
                             std::string_view passage_id) const {
  auto s = find(query_id, passage_id);
  if (!s) {
    throw Error("missing teacher score for pair (" + std::string(query_id) +
                ", " + std::string(passage_id) + ")");
  }
  return *s;
}

TripleData load_triples_with_scores(const std::filesystem::path& triples_path,
                                    const std::filesystem::path& scores_path) {
  TripleData data;
  std::vector<TrainTriple> scored_triples;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  {
    std::ifstream in = open_text(scores_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      strip_cr(line);
      if (trim(line).empty()) continue;
      const auto cols = split(line, '\t');
      if (cols.size() != 5) {
        throw Error(where(scores_path, line_no) +
                    ": expected qid, pos_id, neg_id, score_pos, score_neg");
      }
      TrainTriple t{cols[0], cols[1], cols[2]};
      if (t.pos_id == t.neg_id) {
        throw Error(where(scores_path, line_no) +
                    ": positive and negative passage are identical ('" +
                    t.pos_id + "')");
      }
      const double s_pos = parse_double(cols[3], "score_pos");
      const double s_neg = parse_double(cols[4], "score_neg");
      try {
        data.scores.add(t.query_id, t.pos_id, s_pos);
        data.scores.add(t.query_id, t.neg_id, s_neg);
      } catch (const Error& e) {
        throw Error(where(scores_path, line_no) + ": " + e.what());
      }
      if (seen.emplace(t.query_id, t.pos_id, t.neg_id).second) {
        scored_triples.push_back(std::move(t));
      }
    }
  }

  if (triples_path.empty()) {
    data.triples = std::move(scored_triples);
    return data;
  }

  std::ifstream in = open_text(triples_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw Error(where(triples_path, line_no) +
                  ": expected qid<TAB>pos_id<TAB>neg_id");
    }
    TrainTriple t{cols[0], cols[1], cols[2]};
    if (t.pos_id == t.neg_id) {
      throw Error(where(triples_path, line_no) +
                  ": positive and negative passage are identical ('" +
                  t.pos_id + "')");
    }
    for (const std::string* pid : {&t.pos_id, &t.neg_id}) {
      if (!data.scores.find(t.query_id, *pid)) {
        throw Error(where(triples_path, line_no) +
                    ": missing teacher score for pair (" + t.query_id + ", " +
                    *pid + ")");
      }
    }
    data.triples.push_back(std::move(t));
  }
  return data;
}

void check_triples(std::span<const TrainTriple> triples,
                   const QueryStore& queries, const PassageStore& passages,
                   const TeacherScoreStore& scores) {
  for (const TrainTriple& t : triples) {
    if (t.pos_id == t.neg_id) {
      throw Error("triple (" + t.query_id + ", " + t.pos_id +
                  ") repeats its passage");
    }
    if (!queries.contains(t.query_id)) {
      throw Error("triple references unknown query '" + t.query_id + "'");
    }
    for (const std::string* pid : {&t.pos_id, &t.neg_id}) {
      if (!passages.contains(*pid)) {
        throw Error("triple references unknown passage '" + *pid + "'");
      }
      scores.at(t.query_id, *pid);
    }
  }
}

void write_triples_with_scores(std::span<const TrainTriple> triples,
                               const TeacherScoreStore& scores,
                               const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const TrainTriple& t : triples) {
      out << t.query_id << '\t' << t.pos_id << '\t' << t.neg_id << '\t'
          << format_fixed(scores.at(t.query_id, t.pos_id)) << '\t'
          << format_fixed(scores.at(t.query_id, t.neg_id)) << '\n';
    }
  });
}

void Qrels::set(const std::string& query_id, const std::string& passage_id,
                int grade) {
  if (grade < 0) {
    throw Error("negative grade for (" + query_id + ", " + passage_id + ")");
  }
  grades_[query_id][passage_id] = grade;
}

int Qrels::grade(std::string_view query_id, std::string_view passage_id) const {
  const auto* j = judgments(query_id);
  if (j == nullptr) return 0;
  auto it = j->find(std::string(passage_id));
  return it == j->end() ? 0 : it->second;
}

const std::map<std::string, int>* Qrels::judgments(
    std::string_view query_id) const {
  auto it = grades_.find(std::string(query_id));
  return it == grades_.end() ? nullptr : &it->second;
}

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cols = split_whitespace(line);
    if (cols.empty()) continue;
    if (cols.size() != 4) {
      throw Error(where(path, line_no) + ": expected `qid 0 pid grade`");
    }
    const long long grade = parse_int(cols[3], "grade");
    try {
      qrels.set(cols[0], cols[2], static_cast<int>(grade));
    } catch (const Error& e) {
      throw Error(where(path, line_no) + ": " + e.what());
    }
  }
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const auto& [qid, judged] : qrels.all()) {
      for (const auto& [pid, grade] : judged) {
        out << qid << " 0 " << pid << ' ' << grade << '\n';
      }
    }
  });
}

bool ranks_before(const ScoredPassage& a, const ScoredPassage& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.passage_id < b.passage_id;
}

void sort_ranking(std::vector<ScoredPassage>& ranking) {
  std::sort(ranking.begin(), ranking.end(), ranks_before);
}

void Run::set(const std::string& query_id,
              std::vector<ScoredPassage> ranking) {
  sort_ranking(ranking);
  set_ranked(query_id, std::move(ranking));
}

void Run::set_ranked(const std::string& query_id,
                     std::vector<ScoredPassage> ranking) {
  std::set<std::string_view> ids;
  for (const auto& sp : ranking) {
    if (!ids.insert(sp.passage_id).second) {
      throw Error("duplicate passage '" + sp.passage_id + "' in run for query " +
                  query_id);
    }
  }
  rankings_[query_id] = std::move(ranking);
}

const std::vector<ScoredPassage>* Run::find(std::string_view query_id) const {
  auto it = rankings_.find(std::string(query_id));
  return it == rankings_.end() ? nullptr : &it->second;
}

std::string format_run(const Run& run, std::string_view tag) {
  std::ostringstream out;
  for (const auto& [qid, ranking] : run.all()) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      out << qid << " Q0 " << ranking[i].passage_id << ' ' << (i + 1) << ' '
          << format_fixed(ranking[i].score) << ' ' << tag << '\n';
    }
  }
  return out.str();
}

void write_run(const Run& run, const std::filesystem::path& path,
               std::string_view tag) {
  const std::string text = format_run(run, tag);
  write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

Run load_run(const std::filesystem::path& path) {
  std::ifstream in = open_text(path);
  struct Entry {
    long long rank;
    ScoredPassage sp;
  };
  std::map<std::string, std::vector<Entry>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cols = split_whitespace(line);
    if (cols.empty()) continue;
    if (cols.size() != 6) {
      throw Error(where(path, line_no) +
                  ": expected `qid Q0 pid rank score tag`");
    }
    entries[cols[0]].push_back(
        {parse_int(cols[3], "rank"),
         {cols[2], parse_double(cols[4], "score")}});
  }

  Run run;
  for (auto& [qid, list] : entries) {
    std::set<std::string_view> ids;
    for (const Entry& e : list) {
      if (!ids.insert(e.sp.passage_id).second) {
        throw Error(path.string() + ": duplicate passage '" +
                    e.sp.passage_id + "' for query " + qid);
      }
    }
    std::stable_sort(list.begin(), list.end(),
                     [](const Entry& a, const Entry& b) { return a.rank < b.rank; });
    bool contiguous = true;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].rank != static_cast<long long>(i + 1)) contiguous = false;
    }
    std::vector<ScoredPassage> ranking;
    ranking.reserve(list.size());
    for (Entry& e : list) ranking.push_back(std::move(e.sp));
    if (contiguous) {
      // Six-decimal scores can tie where the originals did not; the stored
      // ranks are authoritative.
      run.set_ranked(qid, std::move(ranking));
    } else {
      log_warning(path.string() + ": non-contiguous ranks for query " + qid +
                  ", re-ranked by score");
      run.set(qid, std::move(ranking));
    }
  }
  return run;
}

}  // namespace tasb
