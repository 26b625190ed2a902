// Copyright 2026 the hop-predict authors
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

#pragma once

#include "hop/system_sim.hpp"

namespace hop {

// Alignment conventions used throughout this header (and by the harness):
//   * filter estimates are indexed by time:    x̂_k for k = 0..K+1, x̂_0 = 0;
//   * H-step series are indexed by *base* time k, the step at which the
//     prediction for time k+H is formed, for k = 0..K-H;
//   * one-step innovations e_k pair with outputs y_k, H-step innovations
//     r_{k+H} live at base k.

// ---------------------------------------------------------------------------
// Steady-state filter
// ---------------------------------------------------------------------------

/// Output of the steady-state predictor recursion
///   x̂_{k+1} = A x̂_k + B u_k + L (y_k - C x̂_k),  x̂_0 = 0.
struct FilterSeries {
  Matrix estimates;    // n x (K+2): column k holds x̂_k
  Matrix predictions;  // m x (K+1): ŷ_k = C x̂_k
  Matrix innovations;  // m x (K+1): e_k = y_k - ŷ_k
};

inline FilterSeries run_filter(const LtiSystem& sys, const RiccatiSolution& sol,
                               const Trajectory& traj) {
  const auto [n, m, n_u] = sys.dims;
  require(traj.outputs.rows() == m && traj.inputs.rows() == n_u,
          "run_filter: trajectory dimensions do not match the system");
  const Index K = traj.steps();

  FilterSeries series;
  series.estimates = Matrix::Zero(n, K + 2);
  series.predictions.resize(m, K + 1);
  series.innovations.resize(m, K + 1);

  for (Index k = 0; k <= K; ++k) {
    series.predictions.col(k) = sys.C * series.estimates.col(k);
    series.innovations.col(k) = traj.outputs.col(k) - series.predictions.col(k);
    series.estimates.col(k + 1) = sys.A * series.estimates.col(k) +
                                  sys.B * traj.inputs.col(k) +
                                  sol.L * series.innovations.col(k);
  }
  return series;
}

// ---------------------------------------------------------------------------
// H-step benchmark
// ---------------------------------------------------------------------------

/// Error covariance of the H-step state prediction:
///   P_H = A^{H-1} P (A^{H-1})' + sum_{i=1}^{H-1} A^{i-1} Q (A^{i-1})'.
inline Matrix h_step_error_covariance(const LtiSystem& sys, const Matrix& P, int H) {
  require(H >= 1, "h_step_error_covariance: H must be >= 1");
  MatrixPowers Apow(sys.A);
  Matrix PH = Apow(H - 1) * P * Apow(H - 1).transpose();
  for (int i = 1; i <= H - 1; ++i)
    PH += Apow(i - 1) * sys.Q * Apow(i - 1).transpose();
  return PH;
}

/// Model-based H-step predictions: the filter estimate rolled out H-1 steps
/// through the known dynamics and the already-generated future inputs,
///   x̄_{k+H} = A^{H-1} x̂_{k+1} + sum_{i=1}^{H-1} A^{H-1-i} B u_{k+i},
///   ȳ_{k+H} = C x̄_{k+H}.
/// For H = 1 this is exactly the filter's one-step prediction.
struct BenchmarkSeries {
  Matrix predictions;       // m x (K-H+1): column k holds ȳ_{k+H}
  Matrix innovations;       // m x (K-H+1): r_{k+H} = y_{k+H} - ȳ_{k+H}
  int horizon = 1;
  Matrix error_covariance;  // P_H

  Index bases() const { return predictions.cols(); }
};

inline BenchmarkSeries h_step_benchmark(const LtiSystem& sys,
                                        const RiccatiSolution& sol,
                                        const FilterSeries& filter,
                                        const Trajectory& traj, int H) {
  require(H >= 1, "h_step_benchmark: H must be >= 1");
  const Index K = traj.steps();
  require(K >= H, "h_step_benchmark: trajectory shorter than the horizon");
  require(traj.inputs.cols() >= K, "h_step_benchmark: insufficient input lead");
  require(filter.estimates.cols() == K + 2,
          "h_step_benchmark: filter series does not match the trajectory");

  MatrixPowers Apow(sys.A);
  BenchmarkSeries series;
  series.horizon = H;
  series.predictions.resize(sys.dims.m, K - H + 1);
  series.innovations.resize(sys.dims.m, K - H + 1);
  series.error_covariance = h_step_error_covariance(sys, sol.P, H);

  for (Index k = 0; k + H <= K; ++k) {
    Vector xbar = filter.estimates.col(k + 1);
    if (H > 1) {
      xbar = Apow(H - 1) * xbar;
      for (int i = 1; i <= H - 1; ++i)
        xbar += Apow(H - 1 - i) * (sys.B * traj.inputs.col(k + i));
    }
    series.predictions.col(k) = sys.C * xbar;
    series.innovations.col(k) = traj.outputs.col(k + H) - series.predictions.col(k);
  }
  return series;
}

/// Largest deviation (max over bases, sup-norm over components) from the
/// identity decomposing the H-step innovation into one-step innovations:
///   r_{k+H} = e_{k+H} + sum_{i=1}^{H-1} C A^{i-1} L e_{k+H-i}.
/// Zero (exactly) for H = 1; <= 1e-8 on any consistent filter/benchmark pair.
inline double innovation_decomposition_check(const FilterSeries& filter,
                                             const BenchmarkSeries& bench,
                                             const LtiSystem& sys,
                                             const RiccatiSolution& sol) {
  const int H = bench.horizon;
  require(filter.innovations.cols() == bench.bases() + H,
          "innovation_decomposition_check: series are misaligned");

  MatrixPowers Apow(sys.A);
  std::vector<Matrix> weights;  // C A^{i-1} L for i = 1..H-1
  for (int i = 1; i <= H - 1; ++i)
    weights.push_back(sys.C * Apow(i - 1) * sol.L);

  double worst = 0.0;
  for (Index k = 0; k < bench.bases(); ++k) {
    Vector resid = bench.innovations.col(k) - filter.innovations.col(k + H);
    for (int i = 1; i <= H - 1; ++i)
      resid -= weights[static_cast<std::size_t>(i - 1)] *
               filter.innovations.col(k + H - i);
    worst = std::max(worst, resid.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Exact regression weights
// ---------------------------------------------------------------------------

/// The exact weights of the linear regression satisfied by y_{k+H} on the
/// stacked window of p past outputs, p past inputs, and H-1 future inputs.
/// Block i of the output weights (multiplying y_{k-p+i}) is
/// C A^{H-1} (A-LC)^{p-i} L; the input weights carry the matching blocks for
/// past inputs followed by C A^{H-1-j} B for future input u_{k+j}.
struct OptimalWeights {
  Matrix output_weights;  // m x (p*m)
  Matrix input_weights;   // m x ((p+H-1)*n_u)
  int p = 1;
  int horizon = 1;

  Matrix stacked() const {
    Matrix G(output_weights.rows(),
             output_weights.cols() + input_weights.cols());
    G << output_weights, input_weights;
    return G;
  }
};

inline OptimalWeights optimal_weights(const LtiSystem& sys,
                                      const RiccatiSolution& sol, int p, int H) {
  require(p >= 1, "optimal_weights: p must be >= 1");
  require(H >= 1, "optimal_weights: H must be >= 1");
  const auto [n, m, n_u] = sys.dims;

  MatrixPowers Apow(sys.A);
  MatrixPowers Fpow(sys.A - sol.L * sys.C);
  const Matrix CA = sys.C * Apow(H - 1);  // m x n

  OptimalWeights w;
  w.p = p;
  w.horizon = H;
  w.output_weights.resize(m, p * m);
  w.input_weights.resize(m, (p + H - 1) * n_u);
  for (int i = 1; i <= p; ++i) {
    w.output_weights.middleCols((i - 1) * m, m) = CA * Fpow(p - i) * sol.L;
    w.input_weights.middleCols((i - 1) * n_u, n_u) = CA * Fpow(p - i) * sys.B;
  }
  for (int j = 1; j <= H - 1; ++j)
    w.input_weights.middleCols((p + j - 1) * n_u, n_u) =
        sys.C * Apow(H - 1 - j) * sys.B;
  return w;
}

/// Residual bias of the truncated regression at base time k:
///   b_{k+H} = C A^{H-1} (A-LC)^p x̂_{k-p+1}.
/// Decays geometrically in p; the epoch schedule grows p to keep it benign.
inline Vector bias_term(const LtiSystem& sys, const RiccatiSolution& sol,
                        const FilterSeries& filter, Index k, int p, int H) {
  require(p >= 1 && H >= 1, "bias_term: p and H must be >= 1");
  require(k >= p, "bias_term: k must be >= p");
  require(k - p + 1 < filter.estimates.cols(), "bias_term: k beyond the series");
  MatrixPowers Apow(sys.A);
  MatrixPowers Fpow(sys.A - sol.L * sys.C);
  return sys.C * Apow(H - 1) * Fpow(p) * filter.estimates.col(k - p + 1);
}

}  // namespace hop
