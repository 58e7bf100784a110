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

#include "tasb/encoder.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>

namespace tasb {

std::uint64_t FeatureVector::total_count() const {
  std::uint64_t total = 0;
  for (const auto& [index, count] : entries) total += count;
  return total;
}

FeatureVector hash_features(std::span<const std::string> tokens,
                            std::size_t d_feat) {
  if (d_feat == 0) throw Error("hash_features: d_feat must be >= 1");
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const std::string& token : tokens) {
    ++counts[static_cast<std::uint32_t>(fnv1a64(token) % d_feat)];
  }
  FeatureVector fv;
  fv.dim = d_feat;
  fv.entries.assign(counts.begin(), counts.end());
  return fv;
}

SparseRowMatrix normalized_feature_matrix(
    std::span<const FeatureVector> features, std::size_t d_feat) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t row = 0; row < features.size(); ++row) {
    const FeatureVector& fv = features[row];
    const double norm =
        std::max<double>(1.0, static_cast<double>(fv.total_count()));
    for (const auto& [index, count] : fv.entries) {
      if (index >= d_feat) {
        throw Error("feature index " + std::to_string(index) +
                    " out of range for d_feat " + std::to_string(d_feat));
      }
      triplets.emplace_back(static_cast<int>(row), static_cast<int>(index),
                            static_cast<double>(count) / norm);
    }
  }
  SparseRowMatrix x(static_cast<Eigen::Index>(features.size()),
                    static_cast<Eigen::Index>(d_feat));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

StudentModel StudentModel::zeros(std::size_t d_feat, std::size_t d_emb) {
  if (d_feat == 0 || d_emb == 0) throw Error("model dimensions must be >= 1");
  StudentModel m;
  m.weights = RowMatrixXd::Zero(static_cast<Eigen::Index>(d_feat),
                                static_cast<Eigen::Index>(d_emb));
  return m;
}

StudentModel StudentModel::random(std::size_t d_feat, std::size_t d_emb,
                                  std::uint64_t seed, double scale) {
  StudentModel m = zeros(d_feat, d_emb);
  m.seed = seed;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
    m.weights.data()[i] = scale * rng.normal();
  }
  return m;
}

Eigen::VectorXd student_encode(const StudentModel& model,
                               const FeatureVector& features) {
  const std::size_t d_feat = model.feature_dim();
  if (features.dim != 0 && features.dim != d_feat) {
    throw Error("student_encode: features have dim " +
                std::to_string(features.dim) + ", model expects " +
                std::to_string(d_feat));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.weights.cols());
  for (const auto& [index, count] : features.entries) {
    if (index >= d_feat) {
      throw Error("student_encode: feature index " + std::to_string(index) +
                  " >= d_feat " + std::to_string(d_feat));
    }
    out.noalias() += static_cast<double>(count) *
                     model.weights.row(index).transpose();
  }
  out /= std::max<double>(1.0, static_cast<double>(features.total_count()));
  return out;
}

Eigen::VectorXd student_encode_tokens(const StudentModel& model,
                                      std::span<const std::string> tokens) {
  return student_encode(model, hash_features(tokens, model.feature_dim()));
}

Eigen::VectorXd TokenEmbeddingTable::embed(std::string_view token) const {
  Rng rng(splitmix64(seed_ ^ fnv1a64(token)));
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v / v.norm();
}

RowMatrixXd TokenEmbeddingTable::embed_all(
    std::span<const std::string> tokens) const {
  RowMatrixXd out(static_cast<Eigen::Index>(tokens.size()),
                  static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed(tokens[i]).transpose();
  }
  return out;
}

double late_interaction_score(const RowMatrixXd& q_embedded,
                              const RowMatrixXd& p_embedded) {
  if (q_embedded.rows() == 0 || p_embedded.rows() == 0) {
    throw Error("late interaction needs non-empty token lists");
  }
  const RowMatrixXd sims = q_embedded * p_embedded.transpose();
  return sims.rowwise().maxCoeff().sum();
}

double teacher_late_interaction(std::span<const std::string> q_tokens,
                                std::span<const std::string> p_tokens,
                                const TokenEmbeddingTable& table) {
  return late_interaction_score(table.embed_all(q_tokens),
                                table.embed_all(p_tokens));
}

double pairwise_teacher(std::string_view query_id, std::string_view passage_id,
                        const TeacherScoreStore& store) {
  return store.at(query_id, passage_id);
}

double StudentScorer::score(const Query& query, const Passage& passage) const {
  return student_score(student_encode_tokens(model_, query.tokens),
                       student_encode_tokens(model_, passage.tokens));
}

double LateInteractionTeacher::score(const Query& query,
                                     const Passage& passage) const {
  return teacher_late_interaction(query.tokens, passage.tokens, table_);
}

double PairwiseTeacher::score(const Query& query,
                              const Passage& passage) const {
  return pairwise_teacher(query.id, passage.id, store_);
}

void write_checkpoint(const StudentModel& model,
                      const std::filesystem::path& path) {
  write_file_atomic(
      path,
      [&](std::ostream& out) {
        out.write("TASBCKPT", 8);
        write_u8(out, kCheckpointVersion);
        write_u64(out, model.feature_dim());
        write_u64(out, model.embedding_dim());
        write_u64(out, model.seed);
        for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
          write_f64(out, model.weights.data()[i]);
        }
      },
      /*binary=*/true);
}

StudentModel read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  expect_magic(in, "TASBCKPT", path);
  const std::uint8_t version = read_u8(in);
  if (version != kCheckpointVersion) {
    throw Error(path.string() + ": unsupported checkpoint version " +
                std::to_string(version));
  }
  const std::uint64_t d_feat = read_u64(in);
  const std::uint64_t d_emb = read_u64(in);
  StudentModel model = StudentModel::zeros(d_feat, d_emb);
  model.seed = read_u64(in);
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
    const double v = read_f64(in);
    if (!std::isfinite(v)) {
      throw Error(path.string() + ": non-finite weight in checkpoint");
    }
    model.weights.data()[i] = v;
  }
  return model;
}

std::uint64_t model_checksum(const StudentModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(model.weights.data()[i]);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace tasb
