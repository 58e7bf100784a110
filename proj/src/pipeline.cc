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

#include "tasb/pipeline.h"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "tasb/clustering.h"
#include "tasb/fusion.h"
#include "tasb/stats.h"
#include "tasb/synthetic.h"

namespace tasb {
namespace {

namespace fs = std::filesystem;

TrainConfig make_train_config(const PipelineConfig& c, std::uint64_t seed) {
  TrainConfig t;
  t.loss.mode = c.teacher;
  t.loss.alpha = c.alpha;
  t.loss.inbatch = c.inbatch_loss;
  t.strategy = c.strategy;
  t.batch_size = c.batch_size;
  t.clusters_per_batch = c.clusters_per_batch;
  t.num_bins = c.margin_bins;
  t.learning_rate = c.learning_rate;
  t.max_steps = c.max_steps;
  t.eval_interval = c.eval_interval;
  t.patience = c.patience;
  t.sampler_seed = derive_seed(seed, SeedSlot::kSampler);
  t.teacher_seed = derive_seed(c.seed, SeedSlot::kTeacherTable);
  t.token_dim = c.token_dim;
  t.threaded = c.threaded;
  t.queue_capacity = c.queue_capacity;
  return t;
}

QueryStore load_optional_queries(const fs::path& path, std::size_t cap) {
  return path.empty() ? QueryStore{} : load_queries(path, cap);
}

StudentModel train_baseline(const PipelineConfig& config,
                            const CorpusData& data, const TrainingPool& pool,
                            std::uint64_t seed) {
  TrainConfig t = make_train_config(config, seed);
  t.loss.mode = TeacherMode::kPairwise;
  t.strategy = SamplingStrategy::kRandom;
  t.max_steps = config.baseline_steps;
  t.sampler_seed = splitmix64(derive_seed(seed, SeedSlot::kSampler));
  TrainInputs in;
  in.queries = &data.train_queries;
  in.passages = &data.passages;
  in.pool = &pool;
  return train(t, initial_model(config, seed), in).best;
}

ValidationSet make_validation(const PipelineConfig& config,
                              const CorpusData& data,
                              const StudentModel& baseline,
                              std::uint64_t seed) {
  std::set<std::string> excluded;
  for (const Query& q : data.test_queries) excluded.insert(q.id);
  return build_validation_set(baseline, data.validation_queries, data.passages,
                              data.qrels, config.validation_size,
                              config.validation_top_k,
                              derive_seed(seed, SeedSlot::kValidation),
                              excluded);
}

}  // namespace

PipelineConfig resolve_data(PipelineConfig config) {
  if (!config.collection.empty()) return config;
  const Layout layout{config.output_dir};
  const CorpusFiles files = CorpusFiles::in(layout.data());
  const bool present = fs::exists(files.collection) &&
                       fs::exists(files.train_queries) &&
                       fs::exists(files.validation_queries) &&
                       fs::exists(files.test_queries) &&
                       fs::exists(files.scores) && fs::exists(files.qrels) &&
                       fs::exists(files.test_qrels);
  if (!present) {
    SyntheticConfig sc = config.synthetic;
    sc.seed = derive_seed(config.seed, SeedSlot::kSynthetic);
    write_synthetic_corpus(make_synthetic_corpus(sc), layout.data());
  }
  config.collection = files.collection;
  config.train_queries = files.train_queries;
  config.validation_queries = files.validation_queries;
  config.test_queries = files.test_queries;
  config.triples.clear();
  config.scores = files.scores;
  config.qrels = files.qrels;
  config.eval_qrels = files.test_qrels;
  return config;
}

CorpusData load_data(const PipelineConfig& config) {
  if (config.collection.empty() || config.train_queries.empty() ||
      config.scores.empty()) {
    throw Error("config needs collection, train_queries and scores paths");
  }
  CorpusData d;
  d.passages = load_collection(config.collection, config.passage_cap);
  d.train_queries = load_queries(config.train_queries, config.query_cap);
  d.validation_queries =
      load_optional_queries(config.validation_queries, config.query_cap);
  d.test_queries = load_optional_queries(config.test_queries, config.query_cap);
  d.triples = load_triples_with_scores(config.triples, config.scores);
  check_triples(d.triples.triples, d.train_queries, d.passages,
                d.triples.scores);
  if (!config.qrels.empty()) d.qrels = load_qrels(config.qrels);
  d.eval_qrels = config.eval_qrels.empty() ? d.qrels : load_qrels(config.eval_qrels);
  return d;
}

StudentModel initial_model(const PipelineConfig& config, std::uint64_t seed) {
  return StudentModel::random(config.feature_dim, config.embedding_dim,
                              derive_seed(seed, SeedSlot::kModelInit),
                              config.init_scale);
}

StudentModel ensure_baseline(const PipelineConfig& config,
                             const CorpusData& data) {
  const Layout layout{config.output_dir};
  StudentModel model;
  if (!config.baseline_checkpoint.empty()) {
    model = read_checkpoint(config.baseline_checkpoint);
  } else if (fs::exists(layout.baseline())) {
    model = read_checkpoint(layout.baseline());
  } else {
    const TrainingPool pool(data.triples.triples, data.triples.scores,
                            config.margin_bins);
    model = train_baseline(config, data, pool, config.seed);
    fs::create_directories(layout.dir);
    write_checkpoint(model, layout.baseline());
  }
  if (model.feature_dim() != config.feature_dim ||
      model.embedding_dim() != config.embedding_dim) {
    throw Error("baseline checkpoint dimensions do not match the config");
  }
  return model;
}

int cluster_count(const PipelineConfig& config, std::size_t num_queries) {
  return config.clusters > 0 ? config.clusters
                             : default_cluster_count(num_queries);
}

TopicClusters cmd_cluster(const PipelineConfig& raw) {
  const PipelineConfig config = resolve_data(raw);
  const CorpusData data = load_data(config);
  const StudentModel baseline = ensure_baseline(config, data);
  const Layout layout{config.output_dir};
  TopicClusters clusters = cluster_queries(
      baseline, data.train_queries,
      cluster_count(config, data.train_queries.size()),
      derive_seed(config.seed, SeedSlot::kClustering), config.kmeans_iterations);
  write_clusters(clusters, layout.clusters());
  write_cluster_tsv(clusters, layout.cluster_tsv());
  return clusters;
}

TrainResult cmd_train(const PipelineConfig& raw) {
  const PipelineConfig config = resolve_data(raw);
  const CorpusData data = load_data(config);
  const Layout layout{config.output_dir};
  const StudentModel baseline = ensure_baseline(config, data);

  std::optional<TopicClusters> clusters;
  if (config.strategy != SamplingStrategy::kRandom) {
    clusters = fs::exists(layout.clusters()) ? read_clusters(layout.clusters())
                                             : cmd_cluster(config);
  }
  std::optional<ValidationSet> validation;
  if (!data.validation_queries.empty() && data.qrels.num_queries() > 0) {
    if (fs::exists(layout.validation())) {
      validation = read_validation_set(layout.validation());
    } else {
      validation = make_validation(config, data, baseline, config.seed);
      write_validation_set(*validation, layout.validation());
    }
  }

  const TrainingPool pool(data.triples.triples, data.triples.scores,
                          config.margin_bins);
  TrainInputs in;
  in.queries = &data.train_queries;
  in.passages = &data.passages;
  in.pool = &pool;
  in.clusters = clusters ? &*clusters : nullptr;
  if (validation) {
    in.validation = &*validation;
    in.validation_qrels = &data.qrels;
  }
  // Validation queries are looked up in the same store as training queries.
  QueryStore all_queries;
  if (validation) {
    for (const Query& q : data.train_queries) all_queries.add(q);
    for (const Query& q : data.validation_queries) {
      if (!all_queries.contains(q.id)) all_queries.add(q);
    }
    in.queries = &all_queries;
  }
  TrainOutputs out;
  out.checkpoint = layout.model();
  out.loss_log = layout.loss_log();
  out.eval_log = layout.eval_log();
  if (config.dump_batches) out.batch_dump = layout.batches();
  return train(make_train_config(config, config.seed),
               initial_model(config, config.seed), in, out);
}

DenseIndex cmd_index(const PipelineConfig& raw, const fs::path& model_path) {
  const PipelineConfig config = resolve_data(raw);
  const Layout layout{config.output_dir};
  const StudentModel model =
      read_checkpoint(model_path.empty() ? layout.model() : model_path);
  const PassageStore passages =
      load_collection(config.collection, config.passage_cap);
  DenseIndex index = build_index(model, passages);
  fs::create_directories(layout.dir);
  write_index(index, layout.index());
  return index;
}

Run cmd_search(const PipelineConfig& raw, const fs::path& queries_path,
               std::optional<std::size_t> k, const fs::path& run_path) {
  const PipelineConfig config = resolve_data(raw);
  const Layout layout{config.output_dir};
  const StudentModel model = read_checkpoint(layout.model());
  const DenseIndex index = read_index(layout.index());
  if (index.model_checksum() != model_checksum(model)) {
    throw Error("index was built from a different model; rerun `index`");
  }
  const fs::path qpath = queries_path.empty() ? config.test_queries : queries_path;
  if (qpath.empty()) throw Error("no queries to search (set test_queries)");
  const QueryStore queries = load_queries(qpath, config.query_cap);
  Run run = search_queries(model, index, queries, k.value_or(config.run_depth),
                           config.search_threads);
  write_run(run, run_path.empty() ? layout.run() : run_path, "tasb");
  return run;
}

std::vector<MetricReport> evaluate_run(const PipelineConfig& config,
                                       const Run& run, const Qrels& qrels) {
  return {ndcg_at(run, qrels, 10), mrr_at(run, qrels, 10, config.binarization),
          recall_at(run, qrels, config.run_depth, config.binarization)};
}

std::vector<MetricReport> cmd_eval(const PipelineConfig& raw,
                                   const fs::path& run_path,
                                   const fs::path& qrels_path,
                                   const fs::path& out_dir) {
  const Layout layout{raw.output_dir};
  const Run run = load_run(run_path.empty() ? layout.run() : run_path);
  fs::path qp = qrels_path;
  if (qp.empty()) {
    const PipelineConfig config = resolve_data(raw);
    qp = config.eval_qrels.empty() ? config.qrels : config.eval_qrels;
  }
  if (qp.empty()) throw Error("no qrels to evaluate against");
  const Qrels qrels = load_qrels(qp);
  const auto reports = evaluate_run(raw, run, qrels);
  const fs::path dir = out_dir.empty() ? layout.dir / "eval" : out_dir;
  fs::create_directories(dir);
  for (const auto& r : reports) write_metric_report(r, dir / (r.metric + ".tsv"));
  write_recall_curve(
      recall_curve(run, qrels, raw.recall_cutoffs, raw.binarization),
      dir / "recall_curve.tsv");
  write_file_atomic(dir / "metrics.tsv", [&](std::ostream& out) {
    out << "metric\tqueries\tvalue\n";
    for (const auto& r : reports) {
      out << r.metric << '\t' << r.num_queries() << '\t' << format_fixed(r.mean)
          << '\n';
    }
  });
  return reports;
}

Run cmd_fuse(const fs::path& run_a, const fs::path& run_b, double weight,
             FusionMethod method, const fs::path& out_path) {
  Run fused = fuse_runs(load_run(run_a), load_run(run_b), weight, method);
  write_run(fused, out_path, "tasb-fused");
  return fused;
}

std::vector<LatencyReport> cmd_bench(const PipelineConfig& raw) {
  const PipelineConfig config = resolve_data(raw);
  const Layout layout{config.output_dir};
  const StudentModel model = read_checkpoint(layout.model());
  const DenseIndex index = fs::exists(layout.index())
                               ? read_index(layout.index())
                               : cmd_index(config);
  const QueryStore queries = load_queries(
      config.test_queries.empty() ? config.train_queries : config.test_queries,
      config.query_cap);
  std::vector<LatencyReport> reports;
  for (std::size_t bs : config.bench_batch_sizes) {
    reports.push_back(latency_report(model, index, queries, config.bench_k, bs,
                                     config.bench_repetitions));
  }
  const std::string text = format_latency_tsv(reports);
  write_file_atomic(layout.latency(), [&](std::ostream& out) { out << text; });
  return reports;
}

std::string AblationCell::name() const {
  return std::string(to_string(teacher)) + "/" + std::string(to_string(strategy));
}

const AblationCell& AblationResult::cell(TeacherMode t,
                                         SamplingStrategy s) const {
  for (const auto& c : cells) {
    if (c.teacher == t && c.strategy == s) return c;
  }
  throw Error("ablation has no such cell");
}

AblationResult cmd_ablation(const PipelineConfig& raw) {
  const auto start = std::chrono::steady_clock::now();
  const bool synthetic = raw.collection.empty();
  const PipelineConfig config = resolve_data(raw);
  const CorpusData data = load_data(config);
  if (data.test_queries.empty() || data.validation_queries.empty()) {
    throw Error("ablation needs validation and test queries");
  }
  const Layout layout{config.output_dir};
  const fs::path root = layout.ablation();
  fs::create_directories(root);

  const TrainingPool pool(data.triples.triples, data.triples.scores,
                          config.margin_bins);
  QueryStore all_queries;
  for (const Query& q : data.train_queries) all_queries.add(q);
  for (const Query& q : data.validation_queries) {
    if (!all_queries.contains(q.id)) all_queries.add(q);
  }
  const int k = config.clusters > 0 ? config.clusters
                : synthetic ? static_cast<int>(config.synthetic.topics)
                            : default_cluster_count(data.train_queries.size());

  const std::vector<TeacherMode> teachers = {
      TeacherMode::kPairwise, TeacherMode::kInBatch, TeacherMode::kDual};
  const std::vector<SamplingStrategy> strategies = {
      SamplingStrategy::kRandom, SamplingStrategy::kTas,
      SamplingStrategy::kTasBalanced};

  AblationResult result;
  for (TeacherMode t : teachers) {
    for (SamplingStrategy s : strategies) {
      AblationCell c;
      c.teacher = t;
      c.strategy = s;
      result.cells.push_back(std::move(c));
    }
  }
  const std::size_t n_seeds = config.ablation_seeds;

  auto test_eval = [&](const StudentModel& model, AblationCell& cell,
                       const fs::path& run_path) {
    const DenseIndex index = build_index(model, data.passages);
    const Run run = search_queries(model, index, data.test_queries,
                                   config.run_depth, config.search_threads);
    if (!run_path.empty()) write_run(run, run_path, "tasb");
    const auto reports = evaluate_run(config, run, data.eval_qrels);
    cell.ndcg10.push_back(reports[0].mean);
    cell.mrr10.push_back(reports[1].mean);
    cell.recall.push_back(reports[2].mean);
    for (const auto& [qid, v] : reports[0].per_query) {
      cell.per_query_ndcg10[qid] += v / static_cast<double>(n_seeds);
    }
  };

  for (std::size_t i = 0; i < n_seeds; ++i) {
    const std::uint64_t seed = config.seed + i;
    const fs::path seed_dir = root / ("seed_" + std::to_string(i));
    fs::create_directories(seed_dir);
    const StudentModel init = initial_model(config, seed);
    test_eval(init, result.untrained, {});

    PipelineConfig bc = config;
    bc.baseline_steps = config.ablation_baseline_steps;
    bc.learning_rate = config.ablation_learning_rate;
    const StudentModel baseline = train_baseline(bc, data, pool, seed);
    write_checkpoint(baseline, seed_dir / "baseline.ckpt");
    const TopicClusters clusters =
        cluster_queries(baseline, data.train_queries, k,
                        derive_seed(seed, SeedSlot::kClustering),
                        config.kmeans_iterations);
    write_cluster_tsv(clusters, seed_dir / "clusters.tsv");
    const ValidationSet validation =
        make_validation(config, data, baseline, seed);
    write_validation_set(validation, seed_dir / "validation.tsv");

    for (AblationCell& cell : result.cells) {
      PipelineConfig cc = config;
      cc.teacher = cell.teacher;
      cc.strategy = cell.strategy;
      cc.max_steps = config.ablation_steps;
      cc.learning_rate = config.ablation_learning_rate;
      cc.eval_interval = std::max<std::size_t>(1, config.ablation_steps / 10);
      TrainInputs in;
      in.queries = &all_queries;
      in.passages = &data.passages;
      in.pool = &pool;
      in.clusters = &clusters;
      in.validation = &validation;
      in.validation_qrels = &data.qrels;
      const fs::path cell_dir = seed_dir / (std::string(to_string(cell.teacher)) +
                                            "_" + std::string(to_string(cell.strategy)));
      fs::create_directories(cell_dir);
      TrainOutputs out;
      out.loss_log = cell_dir / "train_loss.tsv";
      out.eval_log = cell_dir / "train_eval.tsv";
      if (config.dump_batches && cell.teacher == TeacherMode::kDual) {
        out.batch_dump = cell_dir / "batches.tsv";
      }
      const TrainResult r = train(make_train_config(cc, seed), init, in, out);
      test_eval(r.best, cell, cell_dir / "run.test.trec");
    }
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const std::string recall_name = "R@" + std::to_string(config.run_depth);

  // Per-seed rows.
  write_file_atomic(root / "ablation_runs.tsv", [&](std::ostream& out) {
    out << "teacher\tsampling\tseed\tnDCG@10\tMRR@10\t" << recall_name << '\n';
    auto rows = [&](const std::string& t, const std::string& s,
                    const AblationCell& c) {
      for (std::size_t i = 0; i < c.ndcg10.size(); ++i) {
        out << t << '\t' << s << '\t' << config.seed + i << '\t'
            << format_fixed(c.ndcg10[i], 4) << '\t' << format_fixed(c.mrr10[i], 4)
            << '\t' << format_fixed(c.recall[i], 4) << '\n';
      }
    };
    rows("none", "untrained", result.untrained);
    for (const auto& c : result.cells) {
      rows(std::string(to_string(c.teacher)), std::string(to_string(c.strategy)), c);
    }
  });
  // Mean over seeds, one row per teacher and sampling.
  write_file_atomic(root / "ablation.tsv", [&](std::ostream& out) {
    out << "teacher\tsampling\tnDCG@10\tMRR@10\t" << recall_name << '\n';
    out << "none\tuntrained\t" << format_fixed(mean(result.untrained.ndcg10), 3)
        << '\t' << format_fixed(mean(result.untrained.mrr10), 3) << '\t'
        << format_fixed(mean(result.untrained.recall), 3) << '\n';
    for (const auto& c : result.cells) {
      out << to_string(c.teacher) << '\t' << to_string(c.strategy) << '\t'
          << format_fixed(mean(c.ndcg10), 3) << '\t'
          << format_fixed(mean(c.mrr10), 3) << '\t'
          << format_fixed(mean(c.recall), 3) << '\n';
    }
  });
  // Seed robustness of the configuration with the best mean nDCG@10.
  {
    for (std::size_t i = 1; i < result.cells.size(); ++i) {
      if (mean(result.cells[i].ndcg10) > mean(result.cells[result.best].ndcg10)) {
        result.best = i;
      }
    }
    const AblationCell& best = result.cells[result.best];
    std::vector<SeedInstance> instances;
    for (std::size_t i = 0; i < best.ndcg10.size(); ++i) {
      SeedInstance inst;
      inst.label = std::string(1, static_cast<char>('A' + i % 26));
      if (i >= 26) inst.label += std::to_string(i / 26);
      inst.metrics = {{"nDCG@10", best.ndcg10[i]},
                      {"MRR@10", best.mrr10[i]},
                      {recall_name, best.recall[i]}};
      instances.push_back(std::move(inst));
    }
    result.robustness = robustness_report(instances);
    write_robustness_tsv(result.robustness, root / "robustness.tsv");
    write_file_atomic(root / "robustness_config.txt",
                      [&](std::ostream& out) { out << best.name() << '\n'; });
  }
  // Paired t-tests on per-query nDCG@10 (averaged over seeds).
  {
    std::vector<std::string> names = {"untrained"};
    std::vector<std::vector<double>> values;
    auto column = [&](const AblationCell& c) {
      std::vector<double> v;
      for (const auto& [qid, x] : result.untrained.per_query_ndcg10) {
        const auto it = c.per_query_ndcg10.find(qid);
        v.push_back(it == c.per_query_ndcg10.end() ? 0.0 : it->second);
      }
      return v;
    };
    values.push_back(column(result.untrained));
    for (const auto& c : result.cells) {
      names.push_back(c.name());
      values.push_back(column(c));
    }
    write_significance_tsv(names, significance_matrix(values),
                           root / "significance.tsv");
  }
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

}  // namespace tasb
