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

// tasb: command-line front end.
//
//   tasb synth    --out DIR                  write the synthetic corpus
//   tasb cluster  --config FILE              baseline + query clusters
//   tasb train    --config FILE [--strategy S] [--teacher T]
//   tasb index    --config FILE [--model CKPT]
//   tasb search   --config FILE [--queries TSV] [--k N] [--run FILE]
//   tasb eval     --config FILE [--run FILE] [--qrels FILE]
//   tasb fuse     --a RUN --b RUN [--weight W] [--method minmax|rrf] --output FILE
//   tasb bench    --config FILE
//   tasb ablation --config FILE
//   tasb pipeline --config FILE             cluster, train, index, search, eval

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tasb/common.h"
#include "tasb/config.h"
#include "tasb/pipeline.h"
#include "tasb/synthetic.h"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> settings;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "global seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--set", c.settings, "extra key=value setting (repeatable)");
}

tasb::PipelineConfig make_config(const Common& c) {
  tasb::PipelineConfig config = c.config_path.empty()
                                    ? tasb::PipelineConfig{}
                                    : tasb::load_config(c.config_path);
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--set", "expected key=value, got " + s);
    }
    tasb::apply_setting(config, tasb::trim(std::string_view(s).substr(0, eq)),
                        tasb::trim(std::string_view(s).substr(eq + 1)));
  }
  if (c.seed) config.seed = *c.seed;
  if (!c.out.empty()) config.output_dir = c.out;
  config.validate();
  return config;
}

void print_metrics(const std::vector<tasb::MetricReport>& reports) {
  for (const auto& r : reports) {
    std::printf("%s\t%zu\t%.4f\n", r.metric.c_str(), r.num_queries(), r.mean);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic-aware sampling and dual-teacher distillation for dense retrieval"};
  app.require_subcommand(1);
  {
    std::string keys = "Config keys (--config file or --set key=value):\n ";
    for (const auto& key : tasb::config_keys()) keys += " " + key;
    app.footer(keys);
  }
  Common common;

  auto* synth = app.add_subcommand("synth", "write the synthetic topical corpus");
  add_common(synth, common);

  auto* cluster = app.add_subcommand("cluster", "cluster training queries");
  add_common(cluster, common);

  std::string strategy, teacher;
  auto* train = app.add_subcommand("train", "train the student");
  add_common(train, common);
  train->add_option("--strategy", strategy, "random | tas | tas-balanced")
      ->check(CLI::IsMember({"random", "tas", "tas-balanced", "tasb"}));
  train->add_option("--teacher", teacher, "pairwise | inbatch | dual")
      ->check(CLI::IsMember({"pairwise", "inbatch", "dual"}));

  std::string model_path;
  auto* index = app.add_subcommand("index", "encode and index the collection");
  add_common(index, common);
  index->add_option("--model", model_path, "checkpoint (default: trained model)");

  std::string queries_path, run_path;
  std::optional<std::size_t> k;
  auto* search = app.add_subcommand("search", "retrieve a TREC run");
  add_common(search, common);
  search->add_option("--queries", queries_path, "query TSV");
  search->add_option("--k", k, "passages per query")->check(CLI::PositiveNumber);
  search->add_option("--run", run_path, "output run file");

  std::string qrels_path, eval_out;
  auto* eval = app.add_subcommand("eval", "evaluate a run");
  add_common(eval, common);
  eval->add_option("--run", run_path, "run file");
  eval->add_option("--qrels", qrels_path, "qrels file");
  eval->add_option("--eval-out", eval_out, "directory for metric TSVs");

  std::string run_a, run_b, fused_path, method = "minmax";
  double weight = 0.5;
  auto* fuse = app.add_subcommand("fuse", "fuse two runs");
  fuse->add_option("--a", run_a, "first run")->required()->check(CLI::ExistingFile);
  fuse->add_option("--b", run_b, "second run")->required()->check(CLI::ExistingFile);
  fuse->add_option("--weight", weight, "weight of the first run")
      ->check(CLI::Range(0.0, 1.0));
  fuse->add_option("--method", method, "minmax | rrf")
      ->check(CLI::IsMember({"minmax", "rrf"}));
  fuse->add_option("--output", fused_path, "fused run")->required();

  auto* bench = app.add_subcommand("bench", "query latency report");
  add_common(bench, common);

  auto* ablation = app.add_subcommand("ablation", "teacher x sampling grid");
  add_common(ablation, common);

  auto* pipeline = app.add_subcommand("pipeline", "cluster, train, index, search, eval");
  add_common(pipeline, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*fuse) {
      tasb::cmd_fuse(run_a, run_b, weight, tasb::parse_fusion_method(method),
                     fused_path);
      return 0;
    }
    tasb::PipelineConfig config = make_config(common);
    if (!strategy.empty()) config.strategy = tasb::parse_sampling_strategy(strategy);
    if (!teacher.empty()) config.teacher = tasb::parse_teacher_mode(teacher);

    if (*synth) {
      tasb::SyntheticConfig sc = config.synthetic;
      sc.seed = tasb::derive_seed(config.seed, tasb::SeedSlot::kSynthetic);
      tasb::write_synthetic_corpus(tasb::make_synthetic_corpus(sc),
                                   tasb::Layout{config.output_dir}.data());
    } else if (*cluster) {
      const auto c = tasb::cmd_cluster(config);
      std::printf("clusters\t%zu\n", c.num_clusters());
    } else if (*train) {
      const auto r = tasb::cmd_train(config);
      std::printf("steps\t%zu\nbest_step\t%zu\nbest_ndcg_cut_10\t%.4f\n",
                  r.steps, r.best_step, r.best_ndcg10);
    } else if (*index) {
      const auto ix = tasb::cmd_index(config, model_path);
      std::printf("passages\t%zu\nbuild_seconds\t%.3f\n", ix.size(),
                  ix.build_seconds);
    } else if (*search) {
      const auto run = tasb::cmd_search(config, queries_path, k, run_path);
      std::printf("queries\t%zu\n", run.num_queries());
    } else if (*eval) {
      print_metrics(tasb::cmd_eval(config, run_path, qrels_path, eval_out));
    } else if (*bench) {
      const auto reports = tasb::cmd_bench(config);
      std::cout << tasb::format_latency_tsv(reports);
    } else if (*ablation) {
      const auto r = tasb::cmd_ablation(config);
      std::printf("cells\t%zu\nseconds\t%.1f\n", r.cells.size(), r.seconds);
    } else if (*pipeline) {
      tasb::cmd_cluster(config);
      tasb::cmd_train(config);
      tasb::cmd_index(config);
      tasb::cmd_search(config);
      print_metrics(tasb::cmd_eval(config));
    }
  } catch (const tasb::Error& e) {
    std::fprintf(stderr, "tasb: %s\n", e.what());
    return 1;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "tasb: usage: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tasb: %s\n", e.what());
    return 1;
  }
  return 0;
}
