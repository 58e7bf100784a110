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

// Adam with bias correction.

#ifndef TASB_OPTIM_H_
#define TASB_OPTIM_H_

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "tasb/common.h"

namespace tasb {

template <typename Scalar>
struct AdamState {
  RowMatrix<Scalar> m;
  RowMatrix<Scalar> v;
  std::uint64_t step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  static AdamState like(Eigen::Index rows, Eigen::Index cols) {
    AdamState s;
    s.m = RowMatrix<Scalar>::Zero(rows, cols);
    s.v = RowMatrix<Scalar>::Zero(rows, cols);
    return s;
  }
};

using OptimizerState = AdamState<double>;

// One update of `params` in place:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
template <typename Derived, typename DerivedG, typename Scalar>
void adam_step(Eigen::MatrixBase<Derived>& params,
               const Eigen::MatrixBase<DerivedG>& grads,
               AdamState<Scalar>& state, Scalar lr) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols() ||
      state.m.rows() != params.rows() || state.m.cols() != params.cols()) {
    throw Error("adam_step: shape mismatch");
  }
  ++state.step;
  state.m = state.beta1 * state.m + (Scalar(1) - state.beta1) * grads;
  state.v = state.beta2 * state.v +
            (Scalar(1) - state.beta2) * grads.cwiseAbs2();
  const auto t = static_cast<Scalar>(state.step);
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, t);
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, t);
  params.derived().array() -=
      lr * (state.m.array() / c1) /
      ((state.v.array() / c2).sqrt() + state.eps);
}

}  // namespace tasb

#endif  // TASB_OPTIM_H_
