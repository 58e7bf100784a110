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

// Dual-encoder student and the two teachers.
//
// The student maps a text to a mean-normalized bag of hashed tokens and
// projects it with a trainable matrix W (d_feat x d_emb):
//
//   e(x) = W^T f(x) / max(1, sum f(x))
//
// Query and passage are encoded independently and scored by a dot product.
// Because e is linear in W, the gradient of every loss in losses.h is closed
// form.
//
// Teachers: a pairwise teacher that looks up precomputed scores, and a
// late-interaction teacher over a frozen table of unit-norm token vectors:
//
//   score(q, p) = sum_i max_j <t(q_i), t(p_j)>

#ifndef TASB_ENCODER_H_
#define TASB_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "tasb/common.h"
#include "tasb/corpus.h"

namespace tasb {

inline constexpr std::size_t kDefaultFeatureDim = 4096;
inline constexpr std::size_t kDefaultEmbeddingDim = 64;
inline constexpr std::size_t kDefaultTokenDim = 32;

// Sparse token counts; entries sorted by index, all counts >= 1.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
  std::size_t dim = 0;

  std::uint64_t total_count() const;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// index = fnv1a64(token) mod d_feat.
FeatureVector hash_features(std::span<const std::string> tokens,
                            std::size_t d_feat);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// One row per feature vector, each row divided by max(1, total count).
// Encoding a batch is then `X * W`.
SparseRowMatrix normalized_feature_matrix(
    std::span<const FeatureVector> features, std::size_t d_feat);

struct StudentModel {
  RowMatrixXd weights;  // d_feat x d_emb
  std::uint64_t seed = 0;

  std::size_t feature_dim() const {
    return static_cast<std::size_t>(weights.rows());
  }
  std::size_t embedding_dim() const {
    return static_cast<std::size_t>(weights.cols());
  }

  static StudentModel zeros(std::size_t d_feat, std::size_t d_emb);
  // Entries N(0, scale^2) from `seed`.
  static StudentModel random(std::size_t d_feat, std::size_t d_emb,
                             std::uint64_t seed, double scale = 0.1);
};

Eigen::VectorXd student_encode(const StudentModel& model,
                               const FeatureVector& features);
Eigen::VectorXd student_encode_tokens(const StudentModel& model,
                                      std::span<const std::string> tokens);

// Rows are encodings of `items` (anything with a `tokens` member), in order.
template <typename Range>
RowMatrixXd student_encode_all(const StudentModel& model, const Range& items) {
  RowMatrixXd out(static_cast<Eigen::Index>(std::size(items)),
                  model.weights.cols());
  Eigen::Index row = 0;
  for (const auto& item : items) {
    out.row(row++) = student_encode_tokens(model, item.tokens).transpose();
  }
  return out;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar student_score(const Eigen::MatrixBase<DerivedA>& q,
                                        const Eigen::MatrixBase<DerivedB>& p) {
  if (q.size() != p.size()) {
    throw Error("student_score: dimension mismatch (" +
                std::to_string(q.size()) + " vs " + std::to_string(p.size()) +
                ")");
  }
  return q.dot(p);
}

// Fixed unit-norm token vectors, keyed by fnv1a64(token) and the table seed.
// Nothing is cached: each lookup regenerates the vector, so the table is a
// pure function of (seed, token).
class TokenEmbeddingTable {
 public:
  TokenEmbeddingTable(std::size_t dim, std::uint64_t seed)
      : dim_(dim), seed_(seed) {}

  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  Eigen::VectorXd embed(std::string_view token) const;
  // One row per token.
  RowMatrixXd embed_all(std::span<const std::string> tokens) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

double teacher_late_interaction(std::span<const std::string> q_tokens,
                                std::span<const std::string> p_tokens,
                                const TokenEmbeddingTable& table);

// Same score from pre-embedded token matrices (rows = tokens).
double late_interaction_score(const RowMatrixXd& q_embedded,
                              const RowMatrixXd& p_embedded);

double pairwise_teacher(std::string_view query_id, std::string_view passage_id,
                        const TeacherScoreStore& store);

// Common scoring surface for the student and both teachers.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const Query& query, const Passage& passage) const = 0;
};

class StudentScorer final : public Scorer {
 public:
  explicit StudentScorer(const StudentModel& model) : model_(model) {}
  double score(const Query& query, const Passage& passage) const override;

 private:
  const StudentModel& model_;
};

class LateInteractionTeacher final : public Scorer {
 public:
  explicit LateInteractionTeacher(TokenEmbeddingTable table)
      : table_(std::move(table)) {}
  double score(const Query& query, const Passage& passage) const override;
  const TokenEmbeddingTable& table() const { return table_; }

 private:
  TokenEmbeddingTable table_;
};

class PairwiseTeacher final : public Scorer {
 public:
  explicit PairwiseTeacher(const TeacherScoreStore& store) : store_(store) {}
  double score(const Query& query, const Passage& passage) const override;

 private:
  const TeacherScoreStore& store_;
};

// Checkpoint: "TASBCKPT", version byte, d_feat, d_emb, seed (u64 LE), then W
// row-major as little-endian f64.
inline constexpr std::uint8_t kCheckpointVersion = 1;
void write_checkpoint(const StudentModel& model,
                      const std::filesystem::path& path);
StudentModel read_checkpoint(const std::filesystem::path& path);

// FNV-1a over the serialized weights; recorded in index files.
std::uint64_t model_checksum(const StudentModel& model);

}  // namespace tasb

#endif  // TASB_ENCODER_H_
