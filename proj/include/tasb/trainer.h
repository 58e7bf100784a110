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

// Training loop: sample a batch, compute the distillation loss and its
// gradient, take an Adam step, and periodically re-rank a fixed validation
// pool to decide when to stop.

#ifndef TASB_TRAINER_H_
#define TASB_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tasb/clustering.h"
#include "tasb/corpus.h"
#include "tasb/encoder.h"
#include "tasb/losses.h"
#include "tasb/optim.h"
#include "tasb/sampler.h"

namespace tasb {

struct TrainConfig {
  LossConfig loss;
  SamplingStrategy strategy = SamplingStrategy::kTasBalanced;
  std::size_t batch_size = 32;
  std::size_t clusters_per_batch = 1;
  int num_bins = 10;
  double learning_rate = 1e-3;
  std::size_t max_steps = 100000;
  std::size_t eval_interval = 4000;
  int patience = 30;
  std::uint64_t sampler_seed = 0;
  std::uint64_t teacher_seed = 0;
  std::size_t token_dim = kDefaultTokenDim;
  bool threaded = true;
  std::size_t queue_capacity = 8;

  void validate() const;
};

// Index of the first maximum; -1 for an empty history.
long long best_eval_index(std::span<const double> history);

// True when the best value is `patience` or more evaluations old. A value
// improves only if strictly greater than every earlier one.
bool early_stop_check(std::span<const double> history, int patience);

struct ValidationSet {
  // Per query: the candidate passages to re-rank, sorted by id.
  std::map<std::string, std::vector<std::string>> pools;
};

// Samples up to `sample_size` judged queries, retrieves the baseline top_k for
// each and adds every relevant (grade >= 1) passage not already retrieved.
// Any query that also appears in `excluded` is a hard error.
ValidationSet build_validation_set(const StudentModel& baseline,
                                   const QueryStore& queries,
                                   const PassageStore& passages,
                                   const Qrels& qrels, std::size_t sample_size,
                                   std::size_t top_k, std::uint64_t seed,
                                   const std::set<std::string>& excluded = {});

void write_validation_set(const ValidationSet& set,
                          const std::filesystem::path& path);
ValidationSet read_validation_set(const std::filesystem::path& path);

// Mean nDCG@10 of the model's re-ranking of each validation pool.
double evaluate_validation(const StudentModel& model, const ValidationSet& set,
                           const QueryStore& queries,
                           const PassageStore& passages, const Qrels& qrels);

struct StepLog {
  std::size_t step = 0;
  LossValue loss;
};

struct EvalLog {
  std::size_t step = 0;
  double ndcg10 = 0.0;
};

struct TrainInputs {
  const QueryStore* queries = nullptr;
  const PassageStore* passages = nullptr;
  const TrainingPool* pool = nullptr;
  const TopicClusters* clusters = nullptr;  // required for TAS strategies
  // Optional; without it no evaluation happens and the final model is kept.
  const ValidationSet* validation = nullptr;
  const Qrels* validation_qrels = nullptr;
};

// Output files; empty paths are skipped.
struct TrainOutputs {
  std::filesystem::path checkpoint;  // best model
  std::filesystem::path loss_log;    // step, L_pair, L_InB, L_DS
  std::filesystem::path eval_log;    // step, nDCG@10
  std::filesystem::path batch_dump;  // every sampled tuple
};

struct TrainResult {
  StudentModel best;
  StudentModel last;
  std::size_t best_step = 0;
  double best_ndcg10 = 0.0;
  std::size_t steps = 0;
  bool early_stopped = false;
  std::vector<StepLog> losses;
  std::vector<EvalLog> evals;
};

// Evaluates at step 0, every eval_interval steps and after the last step.
// On a failure mid-run the best model so far is written to the checkpoint
// path before the error propagates.
TrainResult train(const TrainConfig& config, StudentModel init,
                  const TrainInputs& inputs, const TrainOutputs& outputs = {});

void write_loss_log(std::span<const StepLog> log,
                    const std::filesystem::path& path);
void write_eval_log(std::span<const EvalLog> log,
                    const std::filesystem::path& path);

}  // namespace tasb

#endif  // TASB_TRAINER_H_
