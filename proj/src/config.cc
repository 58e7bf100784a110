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

#include "tasb/config.h"

#include <fstream>
#include <functional>
#include <type_traits>

#include "tasb/common.h"

namespace tasb {
namespace {

using Setter = std::function<void(PipelineConfig&, std::string_view)>;

std::size_t to_size(std::string_view v, std::string_view key) {
  const long long x = parse_int(v, key);
  if (x < 0) throw Error(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(x);
}

bool to_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(std::string(key) + ": expected true or false, got '" +
              std::string(v) + "'");
}

std::vector<std::size_t> to_size_list(std::string_view v, std::string_view key) {
  std::vector<std::size_t> out;
  for (const auto& part : split(v, ',')) out.push_back(to_size(trim(part), key));
  if (out.empty()) throw Error(std::string(key) + ": empty list");
  return out;
}

template <typename T>
Setter field(T PipelineConfig::*member) {
  return [member](PipelineConfig& c, std::string_view v) {
    if constexpr (std::is_same_v<T, std::filesystem::path>) {
      c.*member = std::filesystem::path(std::string(v));
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = to_bool(v, "value");
    } else if constexpr (std::is_same_v<T, double>) {
      c.*member = parse_double(v, "value");
    } else if constexpr (std::is_same_v<T, int>) {
      c.*member = static_cast<int>(parse_int(v, "value"));
    } else if constexpr (std::is_same_v<T, unsigned>) {
      c.*member = static_cast<unsigned>(to_size(v, "value"));
    } else if constexpr (std::is_same_v<T, std::uint64_t> ||
                         std::is_same_v<T, std::size_t>) {
      c.*member = static_cast<T>(to_size(v, "value"));
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      c.*member = to_size_list(v, "value");
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
  };
}

template <typename T>
Setter synth(T SyntheticConfig::*member) {
  return [member](PipelineConfig& c, std::string_view v) {
    if constexpr (std::is_same_v<T, double>) {
      c.synthetic.*member = parse_double(v, "value");
    } else {
      c.synthetic.*member = static_cast<T>(to_size(v, "value"));
    }
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"collection", field(&PipelineConfig::collection)},
      {"train_queries", field(&PipelineConfig::train_queries)},
      {"validation_queries", field(&PipelineConfig::validation_queries)},
      {"test_queries", field(&PipelineConfig::test_queries)},
      {"triples", field(&PipelineConfig::triples)},
      {"scores", field(&PipelineConfig::scores)},
      {"qrels", field(&PipelineConfig::qrels)},
      {"eval_qrels", field(&PipelineConfig::eval_qrels)},
      {"output_dir", field(&PipelineConfig::output_dir)},
      {"seed", field(&PipelineConfig::seed)},
      {"feature_dim", field(&PipelineConfig::feature_dim)},
      {"embedding_dim", field(&PipelineConfig::embedding_dim)},
      {"token_dim", field(&PipelineConfig::token_dim)},
      {"init_scale", field(&PipelineConfig::init_scale)},
      {"query_cap", field(&PipelineConfig::query_cap)},
      {"passage_cap", field(&PipelineConfig::passage_cap)},
      {"clusters", field(&PipelineConfig::clusters)},
      {"kmeans_iterations", field(&PipelineConfig::kmeans_iterations)},
      {"baseline_checkpoint", field(&PipelineConfig::baseline_checkpoint)},
      {"baseline_steps", field(&PipelineConfig::baseline_steps)},
      {"strategy",
       [](PipelineConfig& c, std::string_view v) {
         c.strategy = parse_sampling_strategy(v);
       }},
      {"batch_size", field(&PipelineConfig::batch_size)},
      {"clusters_per_batch", field(&PipelineConfig::clusters_per_batch)},
      {"margin_bins", field(&PipelineConfig::margin_bins)},
      {"queue_capacity", field(&PipelineConfig::queue_capacity)},
      {"threaded", field(&PipelineConfig::threaded)},
      {"dump_batches", field(&PipelineConfig::dump_batches)},
      {"teacher",
       [](PipelineConfig& c, std::string_view v) {
         c.teacher = parse_teacher_mode(v);
       }},
      {"inbatch_loss",
       [](PipelineConfig& c, std::string_view v) {
         c.inbatch_loss = parse_inbatch_loss(v);
       }},
      {"alpha", field(&PipelineConfig::alpha)},
      {"learning_rate", field(&PipelineConfig::learning_rate)},
      {"max_steps", field(&PipelineConfig::max_steps)},
      {"eval_interval", field(&PipelineConfig::eval_interval)},
      {"patience", field(&PipelineConfig::patience)},
      {"validation_size", field(&PipelineConfig::validation_size)},
      {"validation_top_k", field(&PipelineConfig::validation_top_k)},
      {"run_depth", field(&PipelineConfig::run_depth)},
      {"recall_cutoffs", field(&PipelineConfig::recall_cutoffs)},
      {"binarization", field(&PipelineConfig::binarization)},
      {"fusion_weight", field(&PipelineConfig::fusion_weight)},
      {"fusion_method",
       [](PipelineConfig& c, std::string_view v) {
         c.fusion_method = parse_fusion_method(v);
       }},
      {"search_threads", field(&PipelineConfig::search_threads)},
      {"bench_batch_sizes", field(&PipelineConfig::bench_batch_sizes)},
      {"bench_repetitions", field(&PipelineConfig::bench_repetitions)},
      {"bench_k", field(&PipelineConfig::bench_k)},
      {"ablation_seeds", field(&PipelineConfig::ablation_seeds)},
      {"ablation_steps", field(&PipelineConfig::ablation_steps)},
      {"ablation_baseline_steps", field(&PipelineConfig::ablation_baseline_steps)},
      {"ablation_learning_rate", field(&PipelineConfig::ablation_learning_rate)},
      {"synthetic.topics", synth(&SyntheticConfig::topics)},
      {"synthetic.train_queries_per_topic",
       synth(&SyntheticConfig::train_queries_per_topic)},
      {"synthetic.validation_queries_per_topic",
       synth(&SyntheticConfig::validation_queries_per_topic)},
      {"synthetic.test_queries_per_topic",
       synth(&SyntheticConfig::test_queries_per_topic)},
      {"synthetic.passages", synth(&SyntheticConfig::passages)},
      {"synthetic.background_vocab", synth(&SyntheticConfig::background_vocab)},
      {"synthetic.concept_vocab", synth(&SyntheticConfig::concept_vocab)},
      {"synthetic.query_concepts", synth(&SyntheticConfig::query_concepts)},
      {"synthetic.query_generic", synth(&SyntheticConfig::query_generic)},
      {"synthetic.background_share", synth(&SyntheticConfig::background_share)},
      {"synthetic.generic_vocab", synth(&SyntheticConfig::generic_vocab)},
      {"synthetic.passage_length", synth(&SyntheticConfig::passage_length)},
      {"synthetic.generic_share", synth(&SyntheticConfig::generic_share)},
      {"synthetic.easy_negatives", synth(&SyntheticConfig::easy_negatives)},
      {"synthetic.hard_negatives", synth(&SyntheticConfig::hard_negatives)},
      {"synthetic.grade_weight", synth(&SyntheticConfig::grade_weight)},
      {"synthetic.overlap_weight", synth(&SyntheticConfig::overlap_weight)},
      {"synthetic.teacher_noise", synth(&SyntheticConfig::teacher_noise)},
  };
  return table;
}

}  // namespace

void apply_setting(PipelineConfig& config, std::string_view key,
                   std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) {
    throw Error("unknown config key '" + std::string(key) + "'");
  }
  try {
    it->second(config, value);
  } catch (const Error& e) {
    throw Error("config key '" + std::string(key) + "': " + e.what());
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": expected key = value");
    }
    try {
      apply_setting(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  config.validate();
  return config;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, s] : setters()) keys.push_back(k);
  return keys;
}

void PipelineConfig::validate() const {
  if (feature_dim < 1 || embedding_dim < 1 || token_dim < 1) {
    throw Error("feature, embedding and token dimensions must be >= 1");
  }
  if (query_cap < 1 || passage_cap < 1) throw Error("length caps must be >= 1");
  if (clusters < 0) throw Error("clusters must be >= 0");
  if (kmeans_iterations < 1) throw Error("kmeans_iterations must be >= 1");
  if (alpha < 0.0) throw Error("alpha must be >= 0");
  if (patience < 1) throw Error("patience must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (clusters_per_batch < 1 || clusters_per_batch > batch_size) {
    throw Error("clusters_per_batch must lie in [1, batch_size]");
  }
  if (margin_bins < 1) throw Error("margin_bins must be >= 1");
  if (queue_capacity < 1) throw Error("queue_capacity must be >= 1");
  if (run_depth < 1) throw Error("run_depth must be >= 1");
  if (fusion_weight < 0.0 || fusion_weight > 1.0) {
    throw Error("fusion_weight must lie in [0, 1]");
  }
  if (ablation_seeds < 2) throw Error("ablation_seeds must be >= 2");
  if (ablation_steps < 1) throw Error("ablation_steps must be >= 1");
  if (!(ablation_learning_rate > 0.0)) {
    throw Error("ablation_learning_rate must be > 0");
  }
}

}  // namespace tasb
