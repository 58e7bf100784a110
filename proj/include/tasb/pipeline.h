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

// The commands behind the command-line tool. Each reads what earlier
// commands wrote under the output directory and writes its own results
// there, always through write-then-rename.

#ifndef TASB_PIPELINE_H_
#define TASB_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tasb/config.h"
#include "tasb/corpus.h"
#include "tasb/encoder.h"
#include "tasb/flat_index.h"
#include "tasb/metrics.h"
#include "tasb/stats.h"
#include "tasb/trainer.h"

namespace tasb {

struct Layout {
  std::filesystem::path dir;

  std::filesystem::path data() const { return dir / "data"; }
  std::filesystem::path baseline() const { return dir / "baseline.ckpt"; }
  std::filesystem::path clusters() const { return dir / "clusters.bin"; }
  std::filesystem::path cluster_tsv() const { return dir / "clusters.tsv"; }
  std::filesystem::path validation() const { return dir / "validation.tsv"; }
  std::filesystem::path model() const { return dir / "model.ckpt"; }
  std::filesystem::path loss_log() const { return dir / "train_loss.tsv"; }
  std::filesystem::path eval_log() const { return dir / "train_eval.tsv"; }
  std::filesystem::path batches() const { return dir / "batches.tsv"; }
  std::filesystem::path index() const { return dir / "index.bin"; }
  std::filesystem::path run() const { return dir / "run.test.trec"; }
  std::filesystem::path latency() const { return dir / "latency.tsv"; }
  std::filesystem::path ablation() const { return dir / "ablation"; }
};

struct CorpusData {
  PassageStore passages;
  QueryStore train_queries;
  QueryStore validation_queries;
  QueryStore test_queries;
  TripleData triples;
  Qrels qrels;
  Qrels eval_qrels;
};

// Fills empty data paths with a synthetic corpus under <output_dir>/data,
// generating it if it is not there yet.
PipelineConfig resolve_data(PipelineConfig config);

// Loads every data file named by a resolved config and checks the triples.
CorpusData load_data(const PipelineConfig& config);

StudentModel initial_model(const PipelineConfig& config, std::uint64_t seed);

// Pairwise-teacher, random-sampling student used for clustering and for the
// validation pool. Read from baseline_checkpoint or baseline.ckpt when
// present, trained and written to baseline.ckpt otherwise.
StudentModel ensure_baseline(const PipelineConfig& config,
                             const CorpusData& data);

int cluster_count(const PipelineConfig& config, std::size_t num_queries);

TopicClusters cmd_cluster(const PipelineConfig& config);
TrainResult cmd_train(const PipelineConfig& config);
DenseIndex cmd_index(const PipelineConfig& config,
                     const std::filesystem::path& model_path = {});
Run cmd_search(const PipelineConfig& config,
               const std::filesystem::path& queries_path = {},
               std::optional<std::size_t> k = std::nullopt,
               const std::filesystem::path& run_path = {});

// nDCG@10, MRR@10 and recall at run_depth, plus the recall curve.
std::vector<MetricReport> evaluate_run(const PipelineConfig& config,
                                       const Run& run, const Qrels& qrels);
std::vector<MetricReport> cmd_eval(const PipelineConfig& config,
                                   const std::filesystem::path& run_path = {},
                                   const std::filesystem::path& qrels_path = {},
                                   const std::filesystem::path& out_dir = {});
Run cmd_fuse(const std::filesystem::path& run_a,
             const std::filesystem::path& run_b, double weight,
             FusionMethod method, const std::filesystem::path& out_path);
std::vector<LatencyReport> cmd_bench(const PipelineConfig& config);

struct AblationCell {
  TeacherMode teacher = TeacherMode::kDual;
  SamplingStrategy strategy = SamplingStrategy::kRandom;
  std::vector<double> ndcg10;  // one per seed
  std::vector<double> mrr10;
  std::vector<double> recall;  // at run_depth
  std::map<std::string, double> per_query_ndcg10;  // averaged over seeds

  std::string name() const;
};

struct AblationResult {
  AblationCell untrained;
  std::vector<AblationCell> cells;  // teacher-major, then sampling
  std::size_t best = 0;             // cell with the highest mean nDCG@10
  RobustnessSummary robustness;     // of the best cell
  double seconds = 0.0;

  const AblationCell& cell(TeacherMode t, SamplingStrategy s) const;
};

// Every teacher mode crossed with every sampling strategy, each trained once
// per seed from the same initial weights.
AblationResult cmd_ablation(const PipelineConfig& config);

}  // namespace tasb

#endif  // TASB_PIPELINE_H_
