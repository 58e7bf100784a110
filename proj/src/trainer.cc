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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "tasb/batch_queue.h"
#include "tasb/flat_index.h"
#include "tasb/metrics.h"

namespace tasb {

void TrainConfig::validate() const {
  if (loss.alpha < 0.0) throw Error("alpha must be >= 0");
  if (patience < 1) throw Error("patience must be >= 1");
  if (batch_size < 1) throw Error("batch size must be >= 1");
  if (clusters_per_batch < 1 || clusters_per_batch > batch_size) {
    throw Error("clusters per batch must lie in [1, batch size]");
  }
  if (num_bins < 1) throw Error("number of margin bins must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("learning rate must be positive");
  }
  if (eval_interval < 1) throw Error("eval interval must be >= 1");
  if (queue_capacity < 1) throw Error("queue capacity must be >= 1");
}

long long best_eval_index(std::span<const double> history) {
  long long best = -1;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (best < 0 || history[i] > history[static_cast<std::size_t>(best)]) {
      best = static_cast<long long>(i);
    }
  }
  return best;
}

bool early_stop_check(std::span<const double> history, int patience) {
  if (patience < 1) throw Error("patience must be >= 1");
  const long long best = best_eval_index(history);
  if (best < 0) return false;
  const auto last = static_cast<long long>(history.size()) - 1;
  return last - best >= patience;
}

ValidationSet build_validation_set(const StudentModel& baseline,
                                   const QueryStore& queries,
                                   const PassageStore& passages,
                                   const Qrels& qrels, std::size_t sample_size,
                                   std::size_t top_k, std::uint64_t seed,
                                   const std::set<std::string>& excluded) {
  if (top_k < 1) throw Error("validation top_k must be >= 1");
  std::vector<const Query*> judged;
  for (const Query& q : queries) {
    if (excluded.count(q.id) != 0) {
      throw Error("validation query '" + q.id +
                  "' also belongs to an evaluation set");
    }
    if (qrels.judgments(q.id) != nullptr) judged.push_back(&q);
  }
  if (judged.empty()) throw Error("no judged validation queries");
  Rng rng(seed);
  const auto picks = sample_without_replacement(
      judged.size(), std::min(sample_size, judged.size()), rng);

  const DenseIndex index = build_index(baseline, passages);
  ValidationSet set;
  for (std::size_t pick : picks) {
    const Query& q = *judged[pick];
    std::set<std::string> pool;
    for (const ScoredPassage& sp :
         index.search(student_encode_tokens(baseline, q.tokens), top_k)) {
      pool.insert(sp.passage_id);
    }
    for (const auto& [pid, grade] : *qrels.judgments(q.id)) {
      if (grade >= 1 && passages.contains(pid)) pool.insert(pid);
    }
    set.pools[q.id].assign(pool.begin(), pool.end());
  }
  return set;
}

void write_validation_set(const ValidationSet& set,
                          const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const auto& [qid, pool] : set.pools) {
      for (const auto& pid : pool) out << qid << '\t' << pid << '\n';
    }
  });
}

ValidationSet read_validation_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open validation set " + path.string());
  ValidationSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": expected qid<TAB>pid");
    }
    set.pools[cols[0]].push_back(cols[1]);
  }
  for (auto& [qid, pool] : set.pools) {
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  }
  return set;
}

double evaluate_validation(const StudentModel& model, const ValidationSet& set,
                           const QueryStore& queries,
                           const PassageStore& passages, const Qrels& qrels) {
  std::unordered_map<std::string, Eigen::VectorXd> encoded;
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& [qid, pool] : set.pools) {
    const auto* judged = qrels.judgments(qid);
    if (judged == nullptr) continue;
    const Eigen::VectorXd q = student_encode_tokens(model, queries.at(qid).tokens);
    std::vector<ScoredPassage> ranking;
    ranking.reserve(pool.size());
    for (const auto& pid : pool) {
      auto it = encoded.find(pid);
      if (it == encoded.end()) {
        it = encoded
                 .emplace(pid, student_encode_tokens(model, passages.at(pid).tokens))
                 .first;
      }
      ranking.push_back({pid, q.dot(it->second)});
    }
    sort_ranking(ranking);
    sum += ndcg_of_ranking(ranking, *judged, 10);
    ++counted;
  }
  if (counted == 0) throw Error("validation set has no judged queries");
  return sum / static_cast<double>(counted);
}

void write_loss_log(std::span<const StepLog> log,
                    const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "step\tL_pair\tL_InB\tL_DS\n";
    for (const StepLog& s : log) {
      out << s.step << '\t' << format_fixed(s.loss.pair, 8) << '\t'
          << format_fixed(s.loss.inbatch, 8) << '\t'
          << format_fixed(s.loss.total, 8) << '\n';
    }
  });
}

void write_eval_log(std::span<const EvalLog> log,
                    const std::filesystem::path& path) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "step\tndcg_cut_10\n";
    for (const EvalLog& e : log) {
      out << e.step << '\t' << format_fixed(e.ndcg10) << '\n';
    }
  });
}

namespace {

void write_outputs(const TrainResult& result, const TrainOutputs& outputs,
                   const std::string& batch_dump) {
  if (!outputs.checkpoint.empty()) write_checkpoint(result.best, outputs.checkpoint);
  if (!outputs.loss_log.empty()) write_loss_log(result.losses, outputs.loss_log);
  if (!outputs.eval_log.empty()) write_eval_log(result.evals, outputs.eval_log);
  if (!outputs.batch_dump.empty()) {
    write_file_atomic(outputs.batch_dump,
                      [&](std::ostream& out) { out << batch_dump; });
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, StudentModel init,
                  const TrainInputs& inputs, const TrainOutputs& outputs) {
  config.validate();
  if (inputs.queries == nullptr || inputs.passages == nullptr ||
      inputs.pool == nullptr) {
    throw Error("train: queries, passages and training pool are required");
  }
  if (config.strategy != SamplingStrategy::kRandom && inputs.clusters == nullptr) {
    throw Error("train: strategy " + std::string(to_string(config.strategy)) +
                " needs topic clusters");
  }
  const bool evaluate = inputs.validation != nullptr;
  if (evaluate && inputs.validation_qrels == nullptr) {
    throw Error("train: validation set given without qrels");
  }
  if (!init.weights.allFinite()) throw Error("train: initial weights not finite");

  SamplerConfig sc;
  sc.strategy = config.strategy;
  sc.batch_size = config.batch_size;
  sc.clusters_per_batch = config.clusters_per_batch;
  sc.seed = config.sampler_seed;
  auto source = make_batch_source(
      BatchSampler(*inputs.pool,
                   config.strategy == SamplingStrategy::kRandom ? nullptr
                                                                : inputs.clusters,
                   sc),
      config.threaded, config.queue_capacity);

  std::optional<TokenEmbeddingTable> table;
  if (config.loss.needs_inbatch_teacher()) {
    table.emplace(config.token_dim, config.teacher_seed);
  }

  TrainResult result;
  result.last = std::move(init);
  result.best = result.last;
  OptimizerState adam = OptimizerState::like(result.last.weights.rows(),
                                             result.last.weights.cols());
  std::vector<double> history;
  std::ostringstream dump;
  const bool dumping = !outputs.batch_dump.empty();
  if (dumping) write_batch_tsv_header(dump);

  auto run_eval = [&](std::size_t step) {
    const double v =
        evaluate_validation(result.last, *inputs.validation, *inputs.queries,
                            *inputs.passages, *inputs.validation_qrels);
    result.evals.push_back({step, v});
    history.push_back(v);
    if (best_eval_index(history) == static_cast<long long>(history.size()) - 1) {
      result.best = result.last;
      result.best_step = step;
      result.best_ndcg10 = v;
    }
    return early_stop_check(history, config.patience);
  };

  try {
    if (evaluate) run_eval(0);
    RowMatrixXd grad(result.last.weights.rows(), result.last.weights.cols());
    std::size_t step = 0;
    while (step < config.max_steps) {
      const Batch batch = source->next();
      if (dumping) write_batch_tsv(batch, dump);
      const PreparedBatch prepared =
          prepare_batch(batch, *inputs.queries, *inputs.passages,
                        result.last.feature_dim(), table ? &*table : nullptr);
      const LossValue loss = batch_loss(result.last, prepared, config.loss, &grad);
      if (!std::isfinite(loss.total) || !grad.allFinite()) {
        throw Error("non-finite loss or gradient at step " +
                    std::to_string(step + 1));
      }
      adam_step(result.last.weights, grad, adam, config.learning_rate);
      ++step;
      result.losses.push_back({step, loss});
      result.steps = step;
      if (evaluate && (step % config.eval_interval == 0 || step == config.max_steps)) {
        if (run_eval(step)) {
          result.early_stopped = true;
          break;
        }
      }
    }
  } catch (...) {
    if (!evaluate) result.best = result.last;
    write_outputs(result, outputs, dump.str());
    throw;
  }
  if (!evaluate) {
    result.best = result.last;
    result.best_step = result.steps;
  }
  write_outputs(result, outputs, dump.str());
  return result;
}

}  // namespace tasb
