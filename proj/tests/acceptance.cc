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

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero if any fails. `--only N[,M...]` runs a subset; `--out DIR` keeps
// the artifacts of the ablation and end-to-end runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tasb/clustering.h"
#include "tasb/flat_index.h"
#include "tasb/fusion.h"
#include "tasb/kmeans.h"
#include "tasb/losses.h"
#include "tasb/metrics.h"
#include "tasb/pipeline.h"
#include "tasb/sampler.h"
#include "tasb/stats.h"
#include "tasb/synthetic.h"
#include "tasb/trainer.h"

namespace fs = std::filesystem;

namespace tasb {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// 1. Over 1,000 TAS batches (n = 1, b = 32) on 2,000 training queries every
// batch is single-cluster with no repeated query; under 10 s.
Outcome sampler_invariants() {
  const auto start = Clock::now();
  SyntheticConfig sc;  // 50 topics x 40 training queries
  sc.seed = 1;
  const SyntheticCorpus corpus = make_synthetic_corpus(sc);
  const TrainingPool pool(corpus.triples.triples, corpus.triples.scores, 10);
  const StudentModel model = StudentModel::random(4096, 64, 2);
  const TopicClusters clusters = cluster_queries(
      model, corpus.train_queries, default_cluster_count(corpus.train_queries.size()), 3);
  BatchSampler sampler(pool, &clusters, {SamplingStrategy::kTas, 32, 1, 4});
  int single_cluster = 0, no_repeat = 0;
  constexpr int kBatches = 1000;
  for (int i = 0; i < kBatches; ++i) {
    const Batch batch = sampler.next();
    std::set<int> cs;
    std::set<std::string> qs;
    for (const auto& t : batch.tuples) {
      cs.insert(*clusters.cluster_of(t.query_id));
      qs.insert(t.query_id);
    }
    single_cluster += cs.size() == 1;
    no_repeat += qs.size() == batch.size();
  }
  const double secs = seconds_since(start);
  return {single_cluster == kBatches && no_repeat == kBatches && secs < 10.0 &&
              corpus.train_queries.size() == 2000,
          fmt("queries=%zu single-cluster=%d/1000 repeat-free=%d/1000 %.2fs (<10s)",
              corpus.train_queries.size(), single_cluster, no_repeat, secs)};
}

// 2. 10^4 balanced draws for a query with bin occupancy {99, 0 x 8, 1}; the
// chi-square test of uniformity over the occupied bins holds at 0.01.
Outcome balanced_uniformity() {
  TeacherScoreStore scores;
  std::vector<TrainTriple> triples;
  scores.add("q", "pos", 10.0);
  for (int j = 0; j < 99; ++j) {
    const std::string neg = "n" + std::to_string(j);
    triples.push_back({"q", "pos", neg});
    scores.add("q", neg, 10.0);
  }
  triples.push_back({"q", "pos", "far"});
  scores.add("q", "far", 0.0);
  const TrainingPool pool(triples, scores, 10);
  TopicClusters clusters;
  clusters.query_ids = {"q"};
  clusters.assignment = {0};
  clusters.centroids = RowMatrixXd::Zero(1, 1);
  clusters.rebuild_index();
  const ClusterIndex index(clusters, pool);
  std::vector<int> occupancy;
  for (const auto& bin : pool.bins(0).bins) occupancy.push_back(static_cast<int>(bin.size()));
  Rng rng(derive_seed(42, SeedSlot::kSampler));
  std::vector<int> counts(10, 0);
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    ++counts[static_cast<std::size_t>(
        sample_tas_balanced_batch(pool, index, 1, 1, rng).tuples[0].bin)];
  }
  const double expected = kDraws / 2.0;
  const double chi2 = std::pow(counts[0] - expected, 2) / expected +
                      std::pow(counts[9] - expected, 2) / expected;
  // One degree of freedom: P(X > x) = erfc(sqrt(x / 2)).
  const double p = std::erfc(std::sqrt(chi2 / 2.0));
  const bool layout = occupancy == std::vector<int>{99, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  return {layout && p > 0.01 && counts[0] + counts[9] == kDraws,
          fmt("bin0=%d bin9=%d chi2=%.3f p=%.3f (>0.01)", counts[0], counts[9],
              chi2, p)};
}

// 3. Loss values against hand derivations (1e-9) and gradients against
// central differences (relative error < 1e-4, 20 coordinates x 10 batches).
Outcome loss_gradients() {
  RowMatrixXd s(2, 4), t(2, 4);
  s << 1.0, 0.5, 0.2, 0.0, 0.3, 2.0, 1.0, -1.0;
  t << 2.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.5, 0.0;
  Eigen::VectorXd tp(2), tn(2);
  tp << 1.0, 2.0;
  tn << 0.0, 0.5;
  const double pair = pairwise_margin_loss(s, tp, tn);
  const double inb = inbatch_margin_loss(s, t);
  RowMatrixXd shifted = s;
  shifted.row(0).array() += 5.0;  // self-pair and every margin unchanged
  const double errs[] = {
      std::abs(margin_mse(3.0, 1.0, 2.0, 1.5) - 2.25),
      std::abs(pair - 1.145),
      std::abs(inb - 1.6075),
      std::abs(inbatch_margin_loss(shifted, t) - 1.6075),
      std::abs(inbatch_margin_loss(t, t)),
      std::abs(dual_loss(pair, inb, 0.75) - 2.350625),
  };
  double hand = 0.0;
  for (double e : errs) hand = std::max(hand, e);

  constexpr std::size_t kFeat = 64, kEmb = 8, kB = 4;
  constexpr double kStep = 1e-5;
  Rng rng(7);
  double worst = 0.0;
  int coords = 0;
  for (TeacherMode mode :
       {TeacherMode::kPairwise, TeacherMode::kInBatch, TeacherMode::kDual}) {
    const LossConfig config{mode, 0.75, InBatchLoss::kMarginMse};
    for (int trial = 0; trial < 10; ++trial) {
      PreparedBatch batch;
      auto text = [&] {
        std::vector<std::string> tokens;
        for (std::uint64_t i = 0, n = 1 + rng.uniform(6); i < n; ++i) {
          tokens.push_back("w" + std::to_string(rng.uniform(40)));
        }
        return hash_features(tokens, kFeat);
      };
      std::vector<FeatureVector> q, c;
      for (std::size_t i = 0; i < kB; ++i) q.push_back(text());
      for (std::size_t i = 0; i < 2 * kB; ++i) c.push_back(text());
      batch.query_features = normalized_feature_matrix(q, kFeat);
      batch.candidate_features = normalized_feature_matrix(c, kFeat);
      batch.t_pos = Eigen::VectorXd::NullaryExpr(kB, [&] { return 2.0 + rng.normal(); });
      batch.t_neg = Eigen::VectorXd::NullaryExpr(kB, [&] { return rng.normal(); });
      batch.inbatch_teacher =
          RowMatrixXd::NullaryExpr(kB, 2 * kB, [&] { return rng.normal(); });
      StudentModel model = StudentModel::random(kFeat, kEmb, rng.next_u64(), 0.5);
      RowMatrixXd grad = RowMatrixXd::Zero(kFeat, kEmb);
      batch_loss(model, batch, config, &grad);
      std::vector<Eigen::Index> rows;
      for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(kFeat); ++r) {
        if (grad.row(r).norm() > 1e-8) rows.push_back(r);
      }
      int taken = 0;
      for (int attempt = 0; attempt < 200 && taken < 20; ++attempt) {
        const Eigen::Index r = rows[rng.uniform(rows.size())];
        const auto col = static_cast<Eigen::Index>(rng.uniform(kEmb));
        const double saved = model.weights(r, col);
        model.weights(r, col) = saved + kStep;
        const double up = batch_loss(model, batch, config).total;
        model.weights(r, col) = saved - kStep;
        const double down = batch_loss(model, batch, config).total;
        model.weights(r, col) = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        const double scale = std::max(std::abs(numeric), std::abs(grad(r, col)));
        if (scale < 1e-7) continue;
        worst = std::max(worst, std::abs(numeric - grad(r, col)) / scale);
        ++taken;
        ++coords;
      }
    }
  }
  return {hand < 1e-9 && worst < 1e-4 && coords >= 3 * 10 * 20,
          fmt("hand max err=%.2e (<1e-9) fd coords=%d worst rel err=%.2e (<1e-4)",
              hand, coords, worst)};
}

// 4. Objective non-increasing on 100 random instances; the 4-point toy
// reaches the enumerated optimum.
Outcome kmeans_checks() {
  Rng rng(11);
  int monotone = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const auto n = static_cast<Eigen::Index>(20 + rng.uniform(200));
    const auto d = static_cast<Eigen::Index>(1 + rng.uniform(16));
    const int k = static_cast<int>(1 + rng.uniform(10));
    RowMatrixXd points = RowMatrixXd::NullaryExpr(n, d, [&] { return rng.normal(); });
    const auto result = kmeans(points, k, 100, rng.next_u64());
    bool ok = true;
    for (std::size_t i = 1; i < result.objective_history.size(); ++i) {
      const double prev = result.objective_history[i - 1];
      ok &= result.objective_history[i] <= prev + 1e-12 * (1.0 + prev);
    }
    monotone += ok;
  }
  RowMatrixXd toy(4, 2);
  toy << 0.0, 0.0, 0.0, 1.0, 10.0, 0.0, 10.0, 1.0;
  double optimum = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < 15; ++mask) {
    double total = 0.0;
    for (unsigned side = 0; side < 2; ++side) {
      Eigen::RowVector2d mean = Eigen::RowVector2d::Zero();
      int count = 0;
      for (unsigned i = 0; i < 4; ++i) {
        if (((mask >> i) & 1u) == side) {
          mean += toy.row(i);
          ++count;
        }
      }
      mean /= count;
      for (unsigned i = 0; i < 4; ++i) {
        if (((mask >> i) & 1u) == side) total += (toy.row(i) - mean).squaredNorm();
      }
    }
    optimum = std::min(optimum, total);
  }
  const auto toy_result = kmeans(toy, 2, 100, 5);
  const double gap = toy_result.objective() - optimum;
  return {monotone == 100 && std::abs(gap) < 1e-12,
          fmt("monotone=%d/100 toy objective=%.6f optimum=%.6f", monotone,
              toy_result.objective(), optimum)};
}

// 5. batch_search equals a naive scan: 100 queries, 10,000 x 64 vectors,
// k in {1, 10, 100}, 1 and N threads; under 30 s.
Outcome retrieval_exactness() {
  const auto start = Clock::now();
  Rng rng(13);
  const RowMatrixXd db = RowMatrixXd::NullaryExpr(10000, 64, [&] { return rng.normal(); });
  std::vector<std::string> ids;
  for (int i = 0; i < 10000; ++i) ids.push_back("p" + std::to_string(i));
  const DenseIndex index(db, ids, 0);
  const RowMatrixXd queries = RowMatrixXd::NullaryExpr(100, 64, [&] { return rng.normal(); });
  const unsigned many = std::max(2u, std::thread::hardware_concurrency());
  int mismatches = 0;
  for (std::size_t k : {1u, 10u, 100u}) {
    for (unsigned threads : {1u, many}) {
      const auto got = index.batch_search(queries, k, threads);
      for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        std::vector<std::pair<double, std::string>> all;
        for (Eigen::Index i = 0; i < db.rows(); ++i) {
          double s = 0.0;
          for (Eigen::Index j = 0; j < 64; ++j) s += db(i, j) * queries(q, j);
          all.emplace_back(-s, ids[static_cast<std::size_t>(i)]);
        }
        std::partial_sort(all.begin(), all.begin() + static_cast<long>(k), all.end());
        const auto& r = got[static_cast<std::size_t>(q)];
        if (r.size() != k) {
          ++mismatches;
          continue;
        }
        for (std::size_t i = 0; i < k; ++i) {
          if (r[i].passage_id != all[i].second ||
              std::abs(r[i].score + all[i].first) > 1e-9) {
            ++mismatches;
            break;
          }
        }
      }
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 30.0,
          fmt("mismatched rankings=%d over 3 k x 2 thread counts (1, %u) x 100 "
              "queries, %.2fs (<30s)",
              mismatches, many, secs)};
}

// 6. Metrics on a 3-query toy set against hand values (1e-9).
Outcome metric_fidelity() {
  Qrels qrels;
  qrels.set("q1", "p1", 2);
  qrels.set("q1", "p9", 0);
  qrels.set("q2", "a", 1);
  qrels.set("q2", "b", 2);
  qrels.set("q3", "d", 3);
  Run run;
  run.set_ranked("q1", {{"x", 3.0}, {"p1", 2.0}, {"y", 1.0}});
  run.set_ranked("q2", {{"a", 3.0}, {"c", 2.0}, {"b", 1.0}});
  run.set_ranked("q3", {{"z", 1.0}, {"d", 0.5}, {"w", 0.1}});
  const double l3 = std::log2(3.0);
  const double ndcg_q1 = 1.0 / l3;                        // 0.6309
  const double ndcg_q2 = (1.0 + 2.0 / 2.0) / (2.0 + 1.0 / l3);
  const double ndcg_q3 = (3.0 / l3) / 3.0;
  const std::vector<std::pair<double, double>> checks = {
      {ndcg_at(run, qrels, 10).per_query.at("q1"), 0.6309297535714574},
      {ndcg_at(run, qrels, 10).mean, (ndcg_q1 + ndcg_q2 + ndcg_q3) / 3.0},
      // Threshold 2: the grade-1 passage at rank 1 does not count for q2.
      {mrr_at(run, qrels, 10, 2).per_query.at("q2"), 1.0 / 3.0},
      {mrr_at(run, qrels, 10, 2).mean, (0.5 + 1.0 / 3.0 + 0.5) / 3.0},
      {mrr_at(run, qrels, 10, 1).per_query.at("q2"), 1.0},
      {recall_at(run, qrels, 1).mean, 0.0},
      {recall_at(run, qrels, 2).mean, 2.0 / 3.0},
      {recall_at(run, qrels, 3).mean, 1.0},
  };
  double worst = 0.0;
  for (const auto& [got, want] : checks) worst = std::max(worst, std::abs(got - want));
  return {worst < 1e-9, fmt("%zu values, max abs err=%.2e (<1e-9), nDCG(q1)=%.4f",
                            checks.size(), worst,
                            ndcg_at(run, qrels, 10).per_query.at("q1"))};
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// 7 and 8 share one ablation run.
struct AblationChecks {
  Outcome directional;
  Outcome robustness;
};

AblationChecks ablation_checks(const fs::path& out) {
  PipelineConfig config;
  config.output_dir = out / "ablation_run";
  config.threaded = false;  // one core
  config.dump_batches = true;
  const AblationResult r = cmd_ablation(config);
  const double untrained = mean_of(r.untrained.ndcg10);
  int beats = 0;
  std::string worst_cell;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& c : r.cells) {
    const double m = mean_of(c.ndcg10);
    beats += m > untrained;
    if (m < worst) {
      worst = m;
      worst_cell = c.name();
    }
  }
  const auto& tasb = r.cell(TeacherMode::kDual, SamplingStrategy::kTasBalanced);
  const auto& random = r.cell(TeacherMode::kDual, SamplingStrategy::kRandom);
  int wins = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < tasb.ndcg10.size(); ++i) {
    wins += tasb.ndcg10[i] >= random.ndcg10[i];
    per_seed += fmt(" %.3f/%.3f", tasb.ndcg10[i], random.ndcg10[i]);
  }
  const bool a = beats == static_cast<int>(r.cells.size());
  const bool b = wins >= 4;
  AblationChecks checks;
  checks.directional = {
      a && b && r.seconds < 1200.0,
      fmt("(a) %d/%zu cells beat untrained %.3f (worst %s %.3f); "
          "(b) dual+tas-balanced >= dual+random in %d/5 seeds [tasb/random:%s]; "
          "%.0fs (<1200s); artifacts in %s",
          beats, r.cells.size(), untrained, worst_cell.c_str(), worst, wins,
          per_seed.c_str(), r.seconds,
          (config.output_dir / "ablation").string().c_str())};

  const RobustnessSummary& s = r.robustness;
  const std::string text = format_robustness_tsv(s);
  std::istringstream lines(text);
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  bool shape = rows.size() == s.instances.size() + 3 && s.instances.size() == 5 &&
               rows[rows.size() - 2].rfind("Avg.", 0) == 0 &&
               rows.back().rfind("StdDev", 0) == 0;
  const auto& best = r.cells[r.best];
  double err = 0.0;
  {
    const double m = mean_of(best.ndcg10);
    double ss = 0.0;
    for (double x : best.ndcg10) ss += (x - m) * (x - m);
    err = std::max(std::abs(s.mean[0] - m),
                   std::abs(s.stddev[0] - std::sqrt(ss / (best.ndcg10.size() - 1.0))));
  }
  checks.robustness = {
      shape && err < 1e-12,
      fmt("%s nDCG@10 %.3f +- %.3f over %zu instances, %zu rows (instances + "
          "header + Avg. + StdDev)",
          best.name().c_str(), s.mean[0], s.stddev[0], s.instances.size(),
          rows.size())};
  return checks;
}

// 9. Constructed histories stop exactly after 30 non-improving evaluations.
Outcome early_stopping() {
  auto stop_at = [](const std::vector<double>& h) -> long long {
    for (std::size_t n = 1; n <= h.size(); ++n) {
      if (early_stop_check(std::span(h).first(n), 30)) return static_cast<long long>(n) - 1;
    }
    return -1;
  };
  std::vector<double> decay = {0.5};
  for (int i = 0; i < 50; ++i) decay.push_back(0.5 - 0.001 * (i + 1));
  std::vector<double> plateau(60, 0.4);
  std::vector<double> reset = {0.1, 0.3};
  for (int i = 0; i < 29; ++i) reset.push_back(0.2);
  reset.push_back(0.35);
  for (int i = 0; i < 40; ++i) reset.push_back(0.3);
  std::vector<double> rising;
  for (int i = 0; i < 80; ++i) rising.push_back(0.01 * i);
  const long long a = stop_at(decay), b = stop_at(plateau), c = stop_at(reset),
                  d = stop_at(rising);
  return {a == 30 && b == 30 && c == 31 + 30 && d == -1,
          fmt("stop index decay=%lld plateau=%lld reset=%lld (want 30, 30, 61) "
              "rising=%lld (never)",
              a, b, c, d)};
}

// 10. Fused pool recall at K = infinity dominates each input; weight 1
// restores run_a's order.
Outcome fusion_property() {
  Rng rng(17);
  Qrels qrels;
  Run a, b;
  for (int q = 0; q < 50; ++q) {
    const std::string qid = "q" + std::to_string(q);
    for (int p = 0; p < 5; ++p) qrels.set(qid, "p" + std::to_string(rng.uniform(60)), 2);
    std::vector<ScoredPassage> ra, rb;
    std::set<std::string> sa, sb;
    for (int i = 0; i < 20; ++i) {
      const std::string pa = "p" + std::to_string(rng.uniform(60));
      const std::string pb = "p" + std::to_string(rng.uniform(60));
      if (sa.insert(pa).second) ra.push_back({pa, rng.normal()});
      if (sb.insert(pb).second) rb.push_back({pb, 5.0 + rng.normal()});
    }
    a.set(qid, ra);
    b.set(qid, rb);
  }
  const double ra = recall_at(a, qrels, kUnboundedCutoff).mean;
  const double rb = recall_at(b, qrels, kUnboundedCutoff).mean;
  double worst_margin = std::numeric_limits<double>::infinity();
  bool order = true;
  for (FusionMethod method : {FusionMethod::kMinMax, FusionMethod::kReciprocalRank}) {
    for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Run fused = fuse_runs(a, b, w, method);
      const double rf = recall_at(fused, qrels, kUnboundedCutoff).mean;
      worst_margin = std::min(worst_margin, rf - std::max(ra, rb));
    }
    const Run top = fuse_runs(a, b, 1.0, method);
    for (const auto& [qid, ranking] : a.all()) {
      std::set<std::string> in_a;
      for (const auto& sp : ranking) in_a.insert(sp.passage_id);
      std::vector<std::string> got;
      for (const auto& sp : *top.find(qid)) {
        if (in_a.contains(sp.passage_id)) got.push_back(sp.passage_id);
      }
      std::vector<std::string> want;
      for (const auto& sp : ranking) want.push_back(sp.passage_id);
      order &= got == want;
      // Every passage of run_a except its lowest sits ahead of run_b's.
      for (std::size_t i = 0; i + 1 < want.size(); ++i) {
        order &= (*top.find(qid))[i].passage_id == want[i];
      }
    }
  }
  return {worst_margin >= 0.0 && order,
          fmt("recall a=%.3f b=%.3f fused-min margin=%+.3f; weight-1 order %s",
              ra, rb, worst_margin, order ? "restored" : "broken")};
}

// 11. The pipeline run twice with one seed writes byte-identical runs.
Outcome determinism(const fs::path& out) {
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::string runs[2];
  for (int i = 0; i < 2; ++i) {
    PipelineConfig config;
    config.output_dir = out / ("e2e_" + std::to_string(i));
    fs::remove_all(config.output_dir);
    config.seed = 7;
    config.max_steps = 1000;
    config.eval_interval = 250;
    config.baseline_steps = 300;
    config.threaded = true;
    config.search_threads = 2;
    cmd_cluster(config);
    cmd_train(config);
    cmd_index(config);
    cmd_search(config);
    cmd_eval(config);
    runs[i] = read(Layout{config.output_dir}.run());
  }
  const bool same = !runs[0].empty() && runs[0] == runs[1];
  return {same, fmt("run files %zu and %zu bytes, %s", runs[0].size(),
                    runs[1].size(), same ? "identical" : "different")};
}

}  // namespace
}  // namespace tasb

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  std::string out = (std::filesystem::temp_directory_path() / "tasb_acceptance").string();
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_option("--out", out, "artifact directory");
  CLI11_PARSE(app, argc, argv);
  tasb::set_warnings_enabled(false);

  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int c) { return selected.empty() || selected.contains(c); };
  std::map<int, tasb::Outcome> results;
  auto run = [&](int c, const std::function<tasb::Outcome()>& check) {
    if (!wanted(c)) return;
    const auto start = tasb::Clock::now();
    try {
      results[c] = check();
    } catch (const std::exception& e) {
      results[c] = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %d: %s [%.1fs]\n", results[c].pass ? "PASS" : "FAIL",
                c, results[c].detail.c_str(), tasb::seconds_since(start));
    std::fflush(stdout);
  };

  std::filesystem::create_directories(out);
  run(1, tasb::sampler_invariants);
  run(2, tasb::balanced_uniformity);
  run(3, tasb::loss_gradients);
  run(4, tasb::kmeans_checks);
  run(5, tasb::retrieval_exactness);
  run(6, tasb::metric_fidelity);
  if (wanted(7) || wanted(8)) {
    std::optional<tasb::AblationChecks> ab;
    auto get = [&]() -> const tasb::AblationChecks& {
      if (!ab) {
        try {
          ab = tasb::ablation_checks(out);
        } catch (const std::exception& e) {
          const tasb::Outcome failed{false, std::string("error: ") + e.what()};
          ab = tasb::AblationChecks{failed, failed};
        }
      }
      return *ab;
    };
    run(7, [&] { return get().directional; });
    run(8, [&] { return get().robustness; });
  }
  run(9, tasb::early_stopping);
  run(10, tasb::fusion_property);
  run(11, [&] { return tasb::determinism(out); });

  int failed = 0;
  for (const auto& [c, r] : results) failed += !r.pass;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
