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

// Lloyd's k-means with k-means++ seeding over the rows of a dense matrix.
//
// Each iteration: assign every point to its nearest centroid (lowest index on
// ties), refill empty clusters with the point farthest from its centroid,
// move centroids to member means. Each of the three steps can only lower
//
//   sum_i sum_{x in C_i} ||x - v_i||^2
//
// so the recorded objective is non-increasing. Stops when an assignment pass
// changes nothing, or after max_iters.

#ifndef TASB_KMEANS_H_
#define TASB_KMEANS_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "tasb/common.h"

namespace tasb {

template <typename Scalar>
struct KMeansResult {
  RowMatrix<Scalar> centroids;  // k x d
  std::vector<int> assignment;  // one cluster per input row
  std::vector<Scalar> objective_history;  // one entry per iteration
  int iterations = 0;
  bool converged = false;

  Scalar objective() const {
    return objective_history.empty() ? Scalar(0) : objective_history.back();
  }
};

namespace kmeans_detail {

template <typename Derived, typename Scalar = typename Derived::Scalar>
RowMatrix<Scalar> plus_plus_seeds(const Eigen::MatrixBase<Derived>& points,
                                  int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  RowMatrix<Scalar> centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Eigen::Index>(
      rng.uniform(static_cast<std::uint64_t>(n))));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> min_dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    min_dist[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  }
  for (int c = 1; c < k; ++c) {
    const Scalar total = min_dist.sum();
    Eigen::Index pick = 0;
    if (total > Scalar(0)) {
      Scalar target = static_cast<Scalar>(rng.uniform01()) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= min_dist[i];
        if (target < Scalar(0) && min_dist[i] > Scalar(0)) {
          pick = i;
          break;
        }
      }
      // Rounding can leave `pick` on a zero-weight point; never seed twice.
      while (min_dist[pick] <= Scalar(0) && pick > 0) --pick;
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i],
                             (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

}  // namespace kmeans_detail

// Index of the nearest centroid; lowest index wins ties.
template <typename DerivedP, typename DerivedC>
int nearest_centroid(const Eigen::MatrixBase<DerivedP>& point,
                     const Eigen::MatrixBase<DerivedC>& centroids) {
  using Scalar = typename DerivedC::Scalar;
  int best = 0;
  Scalar best_dist = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const Scalar d = (point - centroids.row(c)).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

template <typename DerivedP, typename DerivedC>
typename DerivedP::Scalar kmeans_objective(
    const Eigen::MatrixBase<DerivedP>& points,
    const Eigen::MatrixBase<DerivedC>& centroids,
    const std::vector<int>& assignment) {
  typename DerivedP::Scalar total(0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(assignment[i])).squaredNorm();
  }
  return total;
}

template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(
    const Eigen::MatrixBase<Derived>& points, int k, int max_iters,
    std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (k < 1) throw Error("kmeans: k must be >= 1");
  if (max_iters < 1) throw Error("kmeans: max_iters must be >= 1");
  if (n < k) {
    throw Error("kmeans: k = " + std::to_string(k) + " exceeds the " +
                std::to_string(n) + " input vectors");
  }
  if (!points.allFinite()) throw Error("kmeans: non-finite input vector");

  Rng rng(seed);
  KMeansResult<Scalar> result;
  result.centroids = kmeans_detail::plus_plus_seeds(points, k, rng);
  result.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k));

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = nearest_centroid(points.row(i), result.centroids);
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
      ++sizes[c];
    }

    // Empty-cluster repair: the farthest point (lowest index on ties) among
    // clusters that can spare one moves into the empty cluster.
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      Eigen::Index far = -1;
      Scalar far_dist = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int owner = result.assignment[i];
        if (sizes[owner] < 2) continue;
        const Scalar d =
            (points.row(i) - result.centroids.row(owner)).squaredNorm();
        if (d > far_dist) {
          far_dist = d;
          far = i;
        }
      }
      --sizes[result.assignment[far]];
      result.assignment[far] = c;
      ++sizes[c];
      result.centroids.row(c) = points.row(far);
      changed = true;
    }

    result.centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      result.centroids.row(result.assignment[i]) += points.row(i);
    }
    for (int c = 0; c < k; ++c) {
      result.centroids.row(c) /= static_cast<Scalar>(sizes[c]);
    }

    result.objective_history.push_back(
        kmeans_objective(points, result.centroids, result.assignment));
    result.iterations = iter + 1;
#ifndef NDEBUG
    if (result.objective_history.size() >= 2) {
      const Scalar prev = result.objective_history[result.objective_history.size() - 2];
      const Scalar cur = result.objective_history.back();
      if (cur > prev + Scalar(1e-9) * (Scalar(1) + std::abs(prev))) {
        throw Error("kmeans: objective increased");
      }
    }
#endif
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace tasb

#endif  // TASB_KMEANS_H_
