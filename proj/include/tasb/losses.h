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

// Distillation losses over one batch.
//
// A batch of b tuples is scored as a b x 2b matrix S: row i is query i, the
// columns are the b positives followed by the b negatives. Column i is the
// query's own positive and column b+i its own negative.
//
//   pairwise   L_pair = 1/b * sum_i ((S[i,i] - S[i,b+i]) - (t+_i - t-_i))^2
//              with the pairwise teacher scores t+/t- from file.
//
//   in-batch   L_inb = 1/(2b) * sum_i sum_j ((S[i,i] - S[i,j]) - (T[i,i] - T[i,j]))^2
//              over all 2b columns j, with T the late-interaction teacher.
//              The j = i term is identically zero. The normalizer is 1/(2b)
//              even though each row carries 2b terms.
//
//   dual       L = L_pair + alpha * L_inb
//
// KL-divergence and ListNet replace the in-batch Margin-MSE with a list loss
// over each row of S against the same row of T.

#ifndef TASB_LOSSES_H_
#define TASB_LOSSES_H_

#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "tasb/common.h"
#include "tasb/corpus.h"
#include "tasb/encoder.h"
#include "tasb/sampler.h"

namespace tasb {

double margin_mse(double s_pos, double s_neg, double t_pos, double t_neg);

double dual_loss(double pair_loss, double inbatch_loss, double alpha);

// KL(softmax(teacher) || softmax(student)).
double kldiv_list_loss(std::span<const double> student,
                       std::span<const double> teacher);
// Cross-entropy of the student's top-one distribution against the teacher's.
// Its minimum over student scores is the teacher entropy, reached when the
// two distributions match.
double listnet_list_loss(std::span<const double> student,
                         std::span<const double> teacher);

enum class TeacherMode { kPairwise, kInBatch, kDual };
enum class InBatchLoss { kMarginMse, kKLDiv, kListNet };

std::string_view to_string(TeacherMode m);
TeacherMode parse_teacher_mode(std::string_view name);
std::string_view to_string(InBatchLoss l);
InBatchLoss parse_inbatch_loss(std::string_view name);

// Loss terms on a score matrix. When `grad` is non-null, dL/dS is added to it
// (it must already be sized like `scores`).
double pairwise_margin_loss(const RowMatrixXd& scores,
                            const Eigen::VectorXd& t_pos,
                            const Eigen::VectorXd& t_neg,
                            RowMatrixXd* grad = nullptr, double weight = 1.0);
double inbatch_margin_loss(const RowMatrixXd& scores,
                           const RowMatrixXd& teacher,
                           RowMatrixXd* grad = nullptr, double weight = 1.0);
double inbatch_list_loss(InBatchLoss kind, const RowMatrixXd& scores,
                         const RowMatrixXd& teacher,
                         RowMatrixXd* grad = nullptr, double weight = 1.0);

// Everything one optimizer step needs, computed once per batch.
struct PreparedBatch {
  SparseRowMatrix query_features;      // b x d_feat, normalized
  SparseRowMatrix candidate_features;  // 2b x d_feat: positives, negatives
  Eigen::VectorXd t_pos;
  Eigen::VectorXd t_neg;
  RowMatrixXd inbatch_teacher;  // b x 2b; empty when not needed

  Eigen::Index size() const { return t_pos.size(); }
};

// `table` may be null when the in-batch teacher is not needed.
PreparedBatch prepare_batch(const Batch& batch, const QueryStore& queries,
                            const PassageStore& passages, std::size_t d_feat,
                            const TokenEmbeddingTable* table);

struct LossConfig {
  TeacherMode mode = TeacherMode::kDual;
  double alpha = 0.75;
  InBatchLoss inbatch = InBatchLoss::kMarginMse;

  bool needs_inbatch_teacher() const { return mode != TeacherMode::kPairwise; }
};

struct LossValue {
  double total = 0.0;
  double pair = 0.0;     // 0 when the mode has no pairwise term
  double inbatch = 0.0;  // 0 when the mode has no in-batch term
};

// Student score matrix S = (Xq W)(Xc W)^T.
RowMatrixXd student_score_matrix(const StudentModel& model,
                                 const PreparedBatch& batch);

// Loss of the configured mode; fills `grad` (d_feat x d_emb) with dL/dW when
// non-null. The student is linear in W, so with E = X W:
//   dL/dW = Xq^T (G Ec) + Xc^T (G^T Eq),  G = dL/dS.
LossValue batch_loss(const StudentModel& model, const PreparedBatch& batch,
                     const LossConfig& config, RowMatrixXd* grad = nullptr);

}  // namespace tasb

#endif  // TASB_LOSSES_H_
