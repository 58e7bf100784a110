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

// Pipeline configuration: a flat `key = value` file. Blank lines and lines
// starting with '#' are ignored; unknown keys are an error.

#ifndef TASB_CONFIG_H_
#define TASB_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tasb/fusion.h"
#include "tasb/losses.h"
#include "tasb/sampler.h"
#include "tasb/synthetic.h"

namespace tasb {

struct PipelineConfig {
  // Data. Empty paths fall back to a synthetic corpus written to
  // <output_dir>/data.
  std::filesystem::path collection;
  std::filesystem::path train_queries;
  std::filesystem::path validation_queries;
  std::filesystem::path test_queries;
  std::filesystem::path triples;  // optional; scores file alone suffices
  std::filesystem::path scores;
  std::filesystem::path qrels;
  std::filesystem::path eval_qrels;  // defaults to qrels
  std::filesystem::path output_dir = "tasb_out";
  std::uint64_t seed = 42;

  // Encoder.
  std::size_t feature_dim = 4096;
  std::size_t embedding_dim = 64;
  std::size_t token_dim = 32;
  double init_scale = 0.1;
  std::size_t query_cap = 30;
  std::size_t passage_cap = 200;

  // Clustering. 0 clusters = max(2, ceil(|Q| / 200)).
  int clusters = 0;
  int kmeans_iterations = 100;
  std::filesystem::path baseline_checkpoint;  // trained when empty
  std::size_t baseline_steps = 2000;

  // Sampler.
  SamplingStrategy strategy = SamplingStrategy::kTasBalanced;
  std::size_t batch_size = 32;
  std::size_t clusters_per_batch = 1;
  int margin_bins = 10;
  std::size_t queue_capacity = 8;
  bool threaded = true;
  bool dump_batches = false;

  // Training.
  TeacherMode teacher = TeacherMode::kDual;
  InBatchLoss inbatch_loss = InBatchLoss::kMarginMse;
  double alpha = 0.75;
  double learning_rate = 1e-3;
  std::size_t max_steps = 20000;
  std::size_t eval_interval = 4000;
  int patience = 30;
  std::size_t validation_size = 500;
  std::size_t validation_top_k = 100;

  // Evaluation and search.
  std::size_t run_depth = 1000;
  std::vector<std::size_t> recall_cutoffs = {10, 50, 100, 200, 500, 1000};
  int binarization = 2;
  double fusion_weight = 0.5;
  FusionMethod fusion_method = FusionMethod::kMinMax;
  unsigned search_threads = 0;

  // Latency benchmark.
  std::vector<std::size_t> bench_batch_sizes = {1, 10, 2000};
  std::size_t bench_repetitions = 100;
  std::size_t bench_k = 1000;

  // Ablation grid.
  std::size_t ablation_seeds = 5;
  std::size_t ablation_steps = 1200;
  std::size_t ablation_baseline_steps = 500;
  double ablation_learning_rate = 1e-4;
  SyntheticConfig synthetic;

  void validate() const;
};

// Applies one `key = value` setting.
void apply_setting(PipelineConfig& config, std::string_view key,
                   std::string_view value);

PipelineConfig load_config(const std::filesystem::path& path);

// All recognised keys, for usage text.
std::vector<std::string> config_keys();

}  // namespace tasb

#endif  // TASB_CONFIG_H_
