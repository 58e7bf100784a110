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

#include "tasb/losses.h"

#include <cmath>
#include <unordered_map>
#include <vector>

namespace tasb {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(std::string(what) + " is not finite");
}

// Stable log-softmax of one row.
Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double mx = x.maxCoeff();
  const double lse = mx + std::log((x.array() - mx).exp().sum());
  return x.array() - lse;
}

void check_lists(std::span<const double> student,
                 std::span<const double> teacher) {
  if (student.size() != teacher.size()) {
    throw Error("list loss: student and teacher lists differ in length");
  }
  if (student.size() < 2) throw Error("list loss: lists need >= 2 entries");
}

}  // namespace

double margin_mse(double s_pos, double s_neg, double t_pos, double t_neg) {
  require_finite(s_pos, "student positive score");
  require_finite(s_neg, "student negative score");
  require_finite(t_pos, "teacher positive score");
  require_finite(t_neg, "teacher negative score");
  const double diff = (s_pos - s_neg) - (t_pos - t_neg);
  return diff * diff;
}

double dual_loss(double pair_loss, double inbatch_loss, double alpha) {
  if (alpha < 0.0) throw Error("alpha must be >= 0");
  return pair_loss + alpha * inbatch_loss;
}

double kldiv_list_loss(std::span<const double> student,
                       std::span<const double> teacher) {
  check_lists(student, teacher);
  const Eigen::Map<const Eigen::VectorXd> s(student.data(),
                                            static_cast<Eigen::Index>(student.size()));
  const Eigen::Map<const Eigen::VectorXd> t(teacher.data(),
                                            static_cast<Eigen::Index>(teacher.size()));
  const Eigen::VectorXd log_ps = log_softmax(s);
  const Eigen::VectorXd log_pt = log_softmax(t);
  return std::max(0.0, (log_pt.array().exp() * (log_pt - log_ps).array()).sum());
}

double listnet_list_loss(std::span<const double> student,
                         std::span<const double> teacher) {
  check_lists(student, teacher);
  const Eigen::Map<const Eigen::VectorXd> s(student.data(),
                                            static_cast<Eigen::Index>(student.size()));
  const Eigen::Map<const Eigen::VectorXd> t(teacher.data(),
                                            static_cast<Eigen::Index>(teacher.size()));
  const Eigen::VectorXd log_ps = log_softmax(s);
  const Eigen::VectorXd pt = log_softmax(t).array().exp();
  return -(pt.array() * log_ps.array()).sum();
}

std::string_view to_string(TeacherMode m) {
  switch (m) {
    case TeacherMode::kPairwise:
      return "pairwise";
    case TeacherMode::kInBatch:
      return "inbatch";
    case TeacherMode::kDual:
      return "dual";
  }
  return "?";
}

TeacherMode parse_teacher_mode(std::string_view name) {
  if (name == "pairwise") return TeacherMode::kPairwise;
  if (name == "inbatch" || name == "in-batch") return TeacherMode::kInBatch;
  if (name == "dual") return TeacherMode::kDual;
  throw Error("unknown teacher mode '" + std::string(name) +
              "' (expected pairwise, inbatch or dual)");
}

std::string_view to_string(InBatchLoss l) {
  switch (l) {
    case InBatchLoss::kMarginMse:
      return "margin-mse";
    case InBatchLoss::kKLDiv:
      return "kldiv";
    case InBatchLoss::kListNet:
      return "listnet";
  }
  return "?";
}

InBatchLoss parse_inbatch_loss(std::string_view name) {
  if (name == "margin-mse" || name == "marginmse") return InBatchLoss::kMarginMse;
  if (name == "kldiv" || name == "kl") return InBatchLoss::kKLDiv;
  if (name == "listnet") return InBatchLoss::kListNet;
  throw Error("unknown in-batch loss '" + std::string(name) +
              "' (expected margin-mse, kldiv or listnet)");
}

double pairwise_margin_loss(const RowMatrixXd& scores,
                            const Eigen::VectorXd& t_pos,
                            const Eigen::VectorXd& t_neg, RowMatrixXd* grad,
                            double weight) {
  const Eigen::Index b = scores.rows();
  if (scores.cols() != 2 * b || t_pos.size() != b || t_neg.size() != b) {
    throw Error("pairwise loss: score matrix must be b x 2b");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double r =
        (scores(i, i) - scores(i, b + i)) - (t_pos[i] - t_neg[i]);
    total += r * r;
    if (grad != nullptr) {
      const double g = weight * 2.0 * r / static_cast<double>(b);
      (*grad)(i, i) += g;
      (*grad)(i, b + i) -= g;
    }
  }
  const double loss = total / static_cast<double>(b);
  require_finite(loss, "pairwise loss");
  return loss;
}

double inbatch_margin_loss(const RowMatrixXd& scores,
                           const RowMatrixXd& teacher, RowMatrixXd* grad,
                           double weight) {
  const Eigen::Index b = scores.rows();
  if (scores.cols() != 2 * b || teacher.rows() != b ||
      teacher.cols() != 2 * b) {
    throw Error("in-batch loss: student and teacher must both be b x 2b");
  }
  const double norm = 1.0 / (2.0 * static_cast<double>(b));
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < 2 * b; ++j) {
      const double u = (scores(i, i) - scores(i, j)) -
                       (teacher(i, i) - teacher(i, j));
      total += u * u;
      if (grad != nullptr) {
        const double g = weight * 2.0 * norm * u;
        row_sum += g;
        (*grad)(i, j) -= g;
      }
    }
    if (grad != nullptr) (*grad)(i, i) += row_sum;
  }
  const double loss = norm * total;
  require_finite(loss, "in-batch loss");
  return loss;
}

double inbatch_list_loss(InBatchLoss kind, const RowMatrixXd& scores,
                         const RowMatrixXd& teacher, RowMatrixXd* grad,
                         double weight) {
  if (kind == InBatchLoss::kMarginMse) {
    return inbatch_margin_loss(scores, teacher, grad, weight);
  }
  const Eigen::Index b = scores.rows();
  if (teacher.rows() != b || teacher.cols() != scores.cols()) {
    throw Error("in-batch loss: student and teacher shapes differ");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Eigen::VectorXd s = scores.row(i).transpose();
    const Eigen::VectorXd t = teacher.row(i).transpose();
    const std::span<const double> ss(s.data(), static_cast<std::size_t>(s.size()));
    const std::span<const double> ts(t.data(), static_cast<std::size_t>(t.size()));
    total += kind == InBatchLoss::kKLDiv ? kldiv_list_loss(ss, ts)
                                         : listnet_list_loss(ss, ts);
    if (grad != nullptr) {
      // Both losses share d/ds = softmax(s) - softmax(t).
      const Eigen::VectorXd diff =
          log_softmax(s).array().exp() - log_softmax(t).array().exp();
      grad->row(i) += (weight / static_cast<double>(b)) * diff.transpose();
    }
  }
  const double loss = total / static_cast<double>(b);
  require_finite(loss, "in-batch list loss");
  return loss;
}

PreparedBatch prepare_batch(const Batch& batch, const QueryStore& queries,
                            const PassageStore& passages, std::size_t d_feat,
                            const TokenEmbeddingTable* table) {
  const std::size_t b = batch.size();
  if (b == 0) throw Error("empty batch");
  std::vector<FeatureVector> qf;
  std::vector<FeatureVector> cf(2 * b);
  std::vector<const Query*> qs;
  std::vector<const Passage*> cs(2 * b);
  PreparedBatch out;
  out.t_pos.resize(static_cast<Eigen::Index>(b));
  out.t_neg.resize(static_cast<Eigen::Index>(b));
  for (std::size_t i = 0; i < b; ++i) {
    const BatchTuple& t = batch.tuples[i];
    qs.push_back(&queries.at(t.query_id));
    cs[i] = &passages.at(t.pos_id);
    cs[b + i] = &passages.at(t.neg_id);
    out.t_pos[static_cast<Eigen::Index>(i)] = t.t_pos;
    out.t_neg[static_cast<Eigen::Index>(i)] = t.t_neg;
  }
  for (const Query* q : qs) qf.push_back(hash_features(q->tokens, d_feat));
  for (std::size_t j = 0; j < 2 * b; ++j) {
    cf[j] = hash_features(cs[j]->tokens, d_feat);
  }
  out.query_features = normalized_feature_matrix(qf, d_feat);
  out.candidate_features = normalized_feature_matrix(cf, d_feat);

  if (table != nullptr) {
    // Each distinct text is embedded once per batch.
    std::unordered_map<std::string, RowMatrixXd> passage_cache;
    std::vector<const RowMatrixXd*> cand(2 * b);
    for (std::size_t j = 0; j < 2 * b; ++j) {
      auto it = passage_cache.find(cs[j]->id);
      if (it == passage_cache.end()) {
        it = passage_cache.emplace(cs[j]->id, table->embed_all(cs[j]->tokens))
                 .first;
      }
      cand[j] = &it->second;
    }
    out.inbatch_teacher.resize(static_cast<Eigen::Index>(b),
                               static_cast<Eigen::Index>(2 * b));
    for (std::size_t i = 0; i < b; ++i) {
      const RowMatrixXd q = table->embed_all(qs[i]->tokens);
      for (std::size_t j = 0; j < 2 * b; ++j) {
        out.inbatch_teacher(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(j)) =
            late_interaction_score(q, *cand[j]);
      }
    }
  }
  return out;
}

RowMatrixXd student_score_matrix(const StudentModel& model,
                                 const PreparedBatch& batch) {
  const RowMatrixXd eq = batch.query_features * model.weights;
  const RowMatrixXd ec = batch.candidate_features * model.weights;
  return eq * ec.transpose();
}

LossValue batch_loss(const StudentModel& model, const PreparedBatch& batch,
                     const LossConfig& config, RowMatrixXd* grad) {
  if (config.alpha < 0.0) throw Error("alpha must be >= 0");
  if (static_cast<std::size_t>(batch.query_features.cols()) !=
      model.feature_dim()) {
    throw Error("batch features do not match the model's d_feat");
  }
  const RowMatrixXd eq = batch.query_features * model.weights;
  const RowMatrixXd ec = batch.candidate_features * model.weights;
  const RowMatrixXd scores = eq * ec.transpose();

  RowMatrixXd dscores;
  RowMatrixXd* ds = nullptr;
  if (grad != nullptr) {
    dscores = RowMatrixXd::Zero(scores.rows(), scores.cols());
    ds = &dscores;
  }

  LossValue value;
  double pair_weight = 0.0;
  double inbatch_weight = 0.0;
  switch (config.mode) {
    case TeacherMode::kPairwise:
      pair_weight = 1.0;
      break;
    case TeacherMode::kInBatch:
      inbatch_weight = 1.0;
      break;
    case TeacherMode::kDual:
      pair_weight = 1.0;
      inbatch_weight = config.alpha;
      break;
  }
  if (config.mode != TeacherMode::kInBatch) {
    value.pair = pairwise_margin_loss(scores, batch.t_pos, batch.t_neg, ds,
                                      pair_weight);
  }
  if (config.mode != TeacherMode::kPairwise) {
    if (batch.inbatch_teacher.size() == 0) {
      throw Error("batch was prepared without in-batch teacher scores");
    }
    value.inbatch = inbatch_list_loss(config.inbatch, scores,
                                      batch.inbatch_teacher, ds, inbatch_weight);
  }
  value.total = pair_weight * value.pair + inbatch_weight * value.inbatch;

  if (grad != nullptr) {
    const RowMatrixXd deq = dscores * ec;
    const RowMatrixXd dec = dscores.transpose() * eq;
    *grad = RowMatrixXd(batch.query_features.transpose() * deq);
    *grad += batch.candidate_features.transpose() * dec;
    if (!grad->allFinite()) throw Error("non-finite gradient");
  }
  return value;
}

}  // namespace tasb
